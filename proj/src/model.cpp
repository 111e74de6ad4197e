#include "orbit/model.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace orbit {

namespace {

constexpr double kRowSumTol = 1e-12;

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

TabularMDP::TabularMDP(int S, int A, int H) : dims_{S, A, H} {
    require(S >= 1 && A >= 1 && H >= 1, "TabularMDP: S, A and H must all be >= 1");
    P_.assign(dims_.cells() * S, 0.0);
    r_.assign(dims_.cells(), 0.0);
}

double TabularMDP::min_positive_probability() const {
    double best = std::numeric_limits<double>::infinity();
    for (double x : P_)
        if (x > 0.0 && x < best) best = x;
    return best;
}

std::string Violation::message() const {
    std::ostringstream os;
    os << what << " at (" << h + 1 << "," << s << "," << a << ")";
    return os.str();
}

std::vector<Violation> validate_mdp(const TabularMDP& mdp) {
    std::vector<Violation> out;
    const Dims d = mdp.dims();
    if (mdp.initial_state < 0 || mdp.initial_state >= d.S)
        out.push_back({0, mdp.initial_state, 0, "initial state out of range"});
    for (int h = 0; h < d.H; ++h)
        for (int s = 0; s < d.S; ++s)
            for (int a = 0; a < d.A; ++a) {
                auto row = mdp.row(h, s, a);
                double sum = 0.0;
                bool negative = false;
                for (double x : row) {
                    if (!(x >= 0.0)) negative = true;
                    sum += x;
                }
                if (negative) out.push_back({h, s, a, "negative probability"});
                if (!(std::abs(sum - 1.0) <= kRowSumTol)) out.push_back({h, s, a, "row sum != 1"});
                const double r = mdp.reward(h, s, a);
                if (!(r >= 0.0 && r <= 1.0)) out.push_back({h, s, a, "reward out of [0,1]"});
            }
    return out;
}

std::string mdp_to_json_text(const TabularMDP& mdp) {
    using nlohmann::json;
    const Dims d = mdp.dims();
    json P = json::array();
    json r = json::array();
    for (int h = 0; h < d.H; ++h) {
        json Ph = json::array();
        json rh = json::array();
        for (int s = 0; s < d.S; ++s) {
            json Ps = json::array();
            json rs = json::array();
            for (int a = 0; a < d.A; ++a) {
                auto row = mdp.row(h, s, a);
                Ps.push_back(std::vector<double>(row.begin(), row.end()));
                rs.push_back(mdp.reward(h, s, a));
            }
            Ph.push_back(std::move(Ps));
            rh.push_back(std::move(rs));
        }
        P.push_back(std::move(Ph));
        r.push_back(std::move(rh));
    }
    json j = {{"S", d.S}, {"A", d.A}, {"H", d.H}, {"P", P}, {"r", r},
              {"initial_state", mdp.initial_state}};
    return j.dump(2);
}

TabularMDP mdp_from_json_text(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("MDP JSON: ") + e.what());
    }
    for (const char* key : {"S", "A", "H", "P", "r", "initial_state"})
        require(j.contains(key), std::string("MDP JSON: missing field \"") + key + "\"");
    const int S = j.at("S").get<int>();
    const int A = j.at("A").get<int>();
    const int H = j.at("H").get<int>();
    TabularMDP mdp(S, A, H);
    const json& P = j.at("P");
    const json& r = j.at("r");
    require(P.is_array() && P.size() == std::size_t(H), "MDP JSON: P must have H entries");
    require(r.is_array() && r.size() == std::size_t(H), "MDP JSON: r must have H entries");
    for (int h = 0; h < H; ++h) {
        require(P[h].size() == std::size_t(S) && r[h].size() == std::size_t(S),
                "MDP JSON: P[h] and r[h] must have S entries");
        for (int s = 0; s < S; ++s) {
            require(P[h][s].size() == std::size_t(A) && r[h][s].size() == std::size_t(A),
                    "MDP JSON: P[h][s] and r[h][s] must have A entries");
            for (int a = 0; a < A; ++a) {
                const json& row = P[h][s][a];
                require(row.size() == std::size_t(S), "MDP JSON: P[h][s][a] must have S entries");
                auto dst = mdp.row(h, s, a);
                for (int s2 = 0; s2 < S; ++s2) dst[s2] = row[s2].get<double>();
                mdp.reward(h, s, a) = r[h][s][a].get<double>();
            }
        }
    }
    mdp.initial_state = j.at("initial_state").get<int>();
    return mdp;
}

// ---------------------------------------------------------------------------

RobustSpec RobustSpec::constrained(Divergence d, double rho, TvScope scope) {
    RobustSpec spec;
    spec.framework = Framework::Constrained;
    spec.divergence = d;
    spec.radius_rho = rho;
    spec.tv_scope = scope;
    return spec;
}

RobustSpec RobustSpec::regularized(Divergence d, double beta, TvScope scope) {
    RobustSpec spec;
    spec.framework = Framework::Regularized;
    spec.divergence = d;
    spec.regularizer_beta = beta;
    spec.tv_scope = scope;
    return spec;
}

void RobustSpec::validate() const {
    if (framework == Framework::Constrained) {
        require(radius_rho > 0.0 && std::isfinite(radius_rho), "radius rho must be > 0");
        require(regularizer_beta == 0.0, "regularizer beta is not used by constrained specs");
    } else {
        require(regularizer_beta > 0.0 && std::isfinite(regularizer_beta),
                "regularizer beta must be > 0");
        require(radius_rho == 0.0, "radius rho is not used by regularized specs");
    }
}

std::string RobustSpec::label() const {
    return (framework == Framework::Constrained ? "CRMDP-" : "RRMDP-") + to_string(divergence);
}

std::string to_string(Framework f) {
    return f == Framework::Constrained ? "constrained" : "regularized";
}

std::string to_string(Divergence d) {
    switch (d) {
    case Divergence::TV: return "TV";
    case Divergence::KL: return "KL";
    case Divergence::Chi2: return "Chi2";
    }
    return "?";
}

std::string to_string(TvScope s) {
    return s == TvScope::AllStates ? "all" : "support";
}

namespace {
std::string lower(std::string s) {
    for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}
}  // namespace

Framework parse_framework(const std::string& text) {
    const auto t = lower(text);
    if (t == "constrained" || t == "crmdp") return Framework::Constrained;
    if (t == "regularized" || t == "rrmdp") return Framework::Regularized;
    throw std::invalid_argument("unknown framework '" + text + "'");
}

Divergence parse_divergence(const std::string& text) {
    const auto t = lower(text);
    if (t == "tv") return Divergence::TV;
    if (t == "kl") return Divergence::KL;
    if (t == "chi2" || t == "chi-square" || t == "chisq") return Divergence::Chi2;
    throw std::invalid_argument("unknown divergence '" + text + "'");
}

TvScope parse_tv_scope(const std::string& text) {
    const auto t = lower(text);
    if (t == "all") return TvScope::AllStates;
    if (t == "support") return TvScope::NominalSupport;
    throw std::invalid_argument("unknown tv scope '" + text + "'");
}

// ---------------------------------------------------------------------------

EmpiricalModel::EmpiricalModel(Dims dims) : dims_(dims) {
    require(dims.S >= 1 && dims.A >= 1 && dims.H >= 1, "EmpiricalModel: bad dimensions");
    n_.assign(dims.cells(), 0);
    r_hat_.assign(dims.cells(), 0.0);
    P_hat_.assign(dims.cells() * dims.S, 0.0);
}

void EmpiricalModel::update(const Trajectory& tau) {
    if (tau.steps.size() != std::size_t(dims_.H))
        throw std::out_of_range("trajectory length must equal H");
    auto in_range = [](int x, int n) { return x >= 0 && x < n; };
    for (const Step& st : tau.steps) {
        if (!in_range(st.state, dims_.S) || !in_range(st.action, dims_.A))
            throw std::out_of_range("trajectory state or action out of range");
        if (!(st.reward >= 0.0 && st.reward <= 1.0)) throw std::out_of_range("trajectory reward outside [0,1]");
    }
    if (!in_range(tau.final_state, dims_.S))
        throw std::out_of_range("trajectory final state out of range");

    for (int h = 0; h < dims_.H; ++h) {
        const Step& st = tau.steps[h];
        const int next = h + 1 < dims_.H ? tau.steps[h + 1].state : tau.final_state;
        const std::size_t c = cell(h, st.state, st.action);
        const double n = double(++n_[c]);
        r_hat_[c] += (st.reward - r_hat_[c]) / n;
        double* row = P_hat_.data() + c * dims_.S;
        for (int s2 = 0; s2 < dims_.S; ++s2) row[s2] += ((s2 == next ? 1.0 : 0.0) - row[s2]) / n;
    }
}

EmpiricalModel empirical_update(EmpiricalModel em, const Trajectory& tau) {
    em.update(tau);
    return em;
}

}  // namespace orbit
