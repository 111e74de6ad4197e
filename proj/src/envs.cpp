#include "orbit/envs.hpp"

#include <sstream>

namespace orbit {

int sample_index(std::span<const double> probs, std::mt19937_64& rng) {
    const double u = std::generate_canonical<double, 53>(rng);
    double acc = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        acc += probs[i];
        last_positive = int(i);
        if (u < acc) return int(i);
    }
    if (last_positive < 0) throw std::invalid_argument("sample_index: no positive probability");
    return last_positive;
}

TabularSimulator::TabularSimulator(TabularMDP mdp) : mdp_(std::move(mdp)) {
    const auto violations = validate_mdp(mdp_);
    if (!violations.empty())
        throw std::invalid_argument("TabularSimulator: " + violations.front().message());
}

Transition TabularSimulator::step(int h, int s, int a, std::mt19937_64& rng) const {
    const Dims d = mdp_.dims();
    if (h < 0 || h >= d.H || s < 0 || s >= d.S || a < 0 || a >= d.A)
        throw std::out_of_range("TabularSimulator::step: index out of range");
    return {sample_index(mdp_.row(h, s, a), rng), mdp_.reward(h, s, a)};
}

TabularMDP mix_models(const TabularMDP& a, const TabularMDP& b, double t) {
    if (!(a.dims() == b.dims())) throw std::invalid_argument("mix_models: dimension mismatch");
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("mix_models: t must be in [0,1]");
    TabularMDP out = a;
    const Dims d = a.dims();
    for (int h = 0; h < d.H; ++h)
        for (int s = 0; s < d.S; ++s)
            for (int x = 0; x < d.A; ++x) {
                auto dst = out.row(h, s, x);
                auto ra = a.row(h, s, x);
                auto rb = b.row(h, s, x);
                for (int s2 = 0; s2 < d.S; ++s2) dst[s2] = (1.0 - t) * ra[s2] + t * rb[s2];
            }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

void self_loops(TabularMDP& mdp) {
    const Dims d = mdp.dims();
    for (int h = 0; h < d.H; ++h)
        for (int s = 0; s < d.S; ++s)
            for (int a = 0; a < d.A; ++a) {
                auto row = mdp.row(h, s, a);
                std::fill(row.begin(), row.end(), 0.0);
                row[s] = 1.0;
            }
}

void set_row(TabularMDP& mdp, int h, int s, int a, std::initializer_list<std::pair<int, double>> entries) {
    auto row = mdp.row(h, s, a);
    std::fill(row.begin(), row.end(), 0.0);
    for (auto [s2, p] : entries) row[s2] += p;
}

TabularMDP visit_ratio_model(double to_s1, double s3_greedy, double s3_other) {
    TabularMDP mdp(kVisitRatioStates, kVisitRatioActions, kVisitRatioHorizon);
    self_loops(mdp);
    for (int a = 0; a < kVisitRatioActions; ++a) {
        set_row(mdp, 0, 0, a, {{1, to_s1}, {2, 1.0 - to_s1}});
        const double to_s3 = a == 0 ? s3_greedy : s3_other;
        set_row(mdp, 1, 1, a, {{3, to_s3}, {4, 1.0 - to_s3}});
        set_row(mdp, 1, 2, a, {{5, 1.0}});
        mdp.reward(2, 3, a) = 1.0;
        mdp.reward(2, 5, a) = 0.5;
    }
    mdp.initial_state = 0;
    return mdp;
}

}  // namespace

VisitRatioEnv build_visit_ratio_env(double beta) {
    if (!(beta > 0.0 && beta < 2.0 / 3.0))
        throw std::invalid_argument("visit-ratio env: beta must lie in (0, 2/3)");
    VisitRatioEnv env;
    env.beta = beta;
    env.c_vr = 3.0 + 1.0 / beta;
    env.nominal = visit_ratio_model(beta, 5.0 / 6.0, 0.5);
    env.worst_case = visit_ratio_model(beta + 1.0 / 3.0, 0.5, 1.0 / 6.0);
    env.sim = std::make_shared<TabularSimulator>(env.nominal);
    return env;
}

TabularMDP visit_ratio_target(const VisitRatioEnv& env, double t) {
    return mix_models(env.nominal, env.worst_case, t);
}

EnvInstance build_simple_rmdp(double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("simple RMDP: q must lie in [0, 1]");
    constexpr int S = 5, A = 5, H = 3;
    TabularMDP mdp(S, A, H);
    for (int h = 0; h < H; ++h)
        for (int a = 0; a < A; ++a) {
            const double x = a / 10.0;
            set_row(mdp, h, 0, a, {{1, 0.4 + x}, {3, 0.1 + q * (0.5 - x)}, {4, (1.0 - q) * (0.5 - x)}});
            set_row(mdp, h, 1, a, {{2, x}, {3, 1.0 - x}});
            set_row(mdp, h, 2, a, {{3, 1.0 - x}, {4, x}});
            set_row(mdp, h, 3, a, {{3, 1.0}});
            set_row(mdp, h, 4, a, {{4, 1.0}});
            for (int s : {0, 1, 2}) mdp.reward(h, s, a) = a / 20.0;
            mdp.reward(h, 4, a) = 1.0;
        }
    mdp.initial_state = 0;
    auto sim = std::make_shared<TabularSimulator>(mdp);
    return {std::move(mdp), std::move(sim)};
}

// ---------------------------------------------------------------------------

int GridMap::start() const {
    for (int c = 0; c < height() * width(); ++c)
        if (at(c) == 'S') return c;
    return -1;
}

GridMap parse_map(std::string_view text) {
    GridMap map;
    std::istringstream in{std::string(text)};
    std::string line;
    int starts = 0, goals = 0;
    while (std::getline(in, line)) {
        std::string row;
        const int r = map.height();
        for (char ch : line) {
            if (ch == ' ' || ch == '\t' || ch == '\r') continue;
            if (ch != 'S' && ch != 'F' && ch != 'H' && ch != 'G') {
                std::ostringstream os;
                os << "unknown character at (" << r << "," << row.size() << ")";
                throw MapParseError(os.str(), r, int(row.size()));
            }
            if (ch == 'S' && ++starts > 1) {
                std::ostringstream os;
                os << "multiple start cells, second at (" << r << "," << row.size() << ")";
                throw MapParseError(os.str(), r, int(row.size()));
            }
            goals += ch == 'G';
            row.push_back(ch);
        }
        if (row.empty()) continue;
        if (!map.rows.empty() && row.size() != map.rows.front().size()) {
            std::ostringstream os;
            os << "ragged row " << r << ": expected " << map.rows.front().size() << " cells, got "
               << row.size();
            throw MapParseError(os.str(), r, -1);
        }
        map.rows.push_back(std::move(row));
    }
    if (map.rows.empty()) throw MapParseError("empty map", -1, -1);
    if (starts == 0) throw MapParseError("map has no start cell", -1, -1);
    if (goals == 0) throw MapParseError("map has no goal cell", -1, -1);
    return map;
}

GridMap default_frozen_lake_map() {
    return parse_map(
        "SFFFFFFF\n"
        "FFFFFFFF\n"
        "FFFHFFFF\n"
        "FFFFFHFF\n"
        "FFFHFFFF\n"
        "FHHFFFHF\n"
        "FHFFHFHF\n"
        "FFFHFFFG\n");
}

namespace {

int move(const GridMap& map, int cell, int dir) {
    int r = cell / map.width(), c = cell % map.width();
    switch (LakeAction(dir)) {
    case LakeAction::Left: c = std::max(c - 1, 0); break;
    case LakeAction::Down: r = std::min(r + 1, map.height() - 1); break;
    case LakeAction::Right: c = std::min(c + 1, map.width() - 1); break;
    case LakeAction::Up: r = std::max(r - 1, 0); break;
    }
    return map.cell(r, c);
}

bool absorbing(char ch) { return ch == 'G' || ch == 'H'; }

class FrozenLakeSimulator final : public Simulator {
public:
    FrozenLakeSimulator(GridMap map, int H, double p_slip, double p_perturb, TabularMDP model)
        : map_(std::move(map)), H_(H), p_slip_(p_slip), p_perturb_(p_perturb), model_(std::move(model)) {}

    Dims dims() const override { return model_.dims(); }
    int reset(std::mt19937_64&) const override { return model_.initial_state; }
    const TabularMDP* model() const override { return &model_; }

    Transition step(int h, int s, int a, std::mt19937_64& rng) const override {
        const Dims d = model_.dims();
        if (h < 0 || h >= d.H || s < 0 || s >= d.S || a < 0 || a >= d.A)
            throw std::out_of_range("FrozenLake::step: index out of range");
        const char here = map_.at(s);
        const double reward = (h == H_ - 1 && here == 'G') ? 1.0 : 0.0;
        const double u_flip = std::generate_canonical<double, 53>(rng);
        const double u_slip = std::generate_canonical<double, 53>(rng);
        if (absorbing(here)) return {s, reward};
        int dir = u_flip < p_perturb_ ? opposite(a) : a;
        if (u_slip >= 1.0 - p_slip_) dir = u_slip < 1.0 - 0.5 * p_slip_ ? (dir + 1) % 4 : (dir + 3) % 4;
        return {move(map_, s, dir), reward};
    }

private:
    GridMap map_;
    int H_;
    double p_slip_;
    double p_perturb_;
    TabularMDP model_;
};

}  // namespace

EnvInstance build_frozen_lake(const GridMap& map, int H, double p_slip, double p_perturb) {
    if (map.rows.empty() || map.start() < 0) throw std::invalid_argument("frozen lake: invalid map");
    if (H < 1) throw std::invalid_argument("frozen lake: H must be >= 1");
    if (!(p_slip >= 0.0 && p_slip < 1.0)) throw std::invalid_argument("frozen lake: p_slip must lie in [0, 1)");
    if (!(p_perturb >= 0.0 && p_perturb < 1.0))
        throw std::invalid_argument("frozen lake: p_perturb must lie in [0, 1)");

    const int S = map.height() * map.width();
    TabularMDP mdp(S, kLakeActions, H);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < kLakeActions; ++a) {
            std::vector<double> row(S, 0.0);
            if (absorbing(map.at(s))) {
                row[s] = 1.0;
            } else {
                for (auto [dir, w] : {std::pair{a, 1.0 - p_perturb}, std::pair{opposite(a), p_perturb}}) {
                    row[move(map, s, dir)] += w * (1.0 - p_slip);
                    row[move(map, s, (dir + 1) % 4)] += w * 0.5 * p_slip;
                    row[move(map, s, (dir + 3) % 4)] += w * 0.5 * p_slip;
                }
            }
            for (int h = 0; h < H; ++h) {
                auto dst = mdp.row(h, s, a);
                std::copy(row.begin(), row.end(), dst.begin());
                mdp.reward(h, s, a) = (h == H - 1 && map.at(s) == 'G') ? 1.0 : 0.0;
            }
        }
    mdp.initial_state = map.start();
    auto sim = std::make_shared<FrozenLakeSimulator>(map, H, p_slip, p_perturb, mdp);
    return {std::move(mdp), std::move(sim)};
}

}  // namespace orbit
