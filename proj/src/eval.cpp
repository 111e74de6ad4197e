#include "orbit/eval.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace orbit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Backward robust recursion. With `pi` the policy is evaluated, otherwise
/// the greedy optimum is taken. Worst-case rows are computed for every
/// action when `all_actions`, else only for the chosen one (the other rows
/// of the kernel keep their nominal values).
RobustEvalResult backward(const TabularMDP& mdp, const RobustSpec& spec, const Policy* pi,
                          bool all_actions, bool want_dist) {
    spec.validate();
    const Dims d = mdp.dims();
    if (pi && (pi->S() != d.S || pi->H() != d.H))
        throw std::invalid_argument("policy dimensions do not match the model");

    RobustEvalResult out{ValueTables(d), pi ? *pi : Policy(d.S, d.H), mdp};
    for (int h = d.H - 1; h >= 0; --h) {
        const auto v_next = out.values.v_row(h + 1);
        const double vmax = d.H - h - 1;
        for (int s = 0; s < d.S; ++s) {
            double best = -kInf;
            int best_a = 0;
            for (int a = 0; a < d.A; ++a) {
                if (pi && !all_actions && a != (*pi)(h, s)) continue;
                const dual::BackupInput in{mdp.row(h, s, a), v_next, vmax};
                dual::BackupOutput b = dual::backup(in, spec, want_dist);
                const double q = mdp.reward(h, s, a) + b.value;
                out.values.q(h, s, a) = q;
                if (b.worst_dist) {
                    auto dst = out.worst_kernel.row(h, s, a);
                    std::copy(b.worst_dist->begin(), b.worst_dist->end(), dst.begin());
                }
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            if (pi) {
                out.values.v(h, s) = out.values.q(h, s, (*pi)(h, s));
            } else {
                out.values.v(h, s) = best;
                out.policy.at(h, s) = best_a;
            }
        }
    }
    return out;
}

std::vector<std::vector<double>> forward(const TabularMDP& mdp, const Policy& pi) {
    const Dims d = mdp.dims();
    std::vector<std::vector<double>> dist(d.H, std::vector<double>(d.S, 0.0));
    dist[0][mdp.initial_state] = 1.0;
    for (int h = 0; h + 1 < d.H; ++h)
        for (int s = 0; s < d.S; ++s) {
            if (dist[h][s] == 0.0) continue;
            auto row = mdp.row(h, s, pi(h, s));
            for (int s2 = 0; s2 < d.S; ++s2) dist[h + 1][s2] += dist[h][s] * row[s2];
        }
    return dist;
}

VisitationProfile profile_from(const TabularMDP& nominal, const TabularMDP& worst, const Policy& pi) {
    VisitationProfile vp;
    vp.d = forward(nominal, pi);
    vp.q = forward(worst, pi);
    vp.ratio_sup = 0.0;
    for (std::size_t h = 0; h < vp.d.size(); ++h)
        for (std::size_t s = 0; s < vp.d[h].size(); ++s) {
            const double d = vp.d[h][s], q = vp.q[h][s];
            double r;
            if (d > 0.0)
                r = q / std::max(d, 1e-300);
            else
                r = q > kVisitationFloor ? kInf : 0.0;
            if (r > vp.ratio_sup) {
                vp.ratio_sup = r;
                vp.argmax_h = int(h);
                vp.argmax_s = int(s);
            }
        }
    return vp;
}

}  // namespace

RobustEvalResult robust_value_of_policy(const TabularMDP& mdp, const Policy& pi, const RobustSpec& spec) {
    return backward(mdp, spec, &pi, true, true);
}

RobustEvalResult robust_optimal(const TabularMDP& mdp, const RobustSpec& spec) {
    return backward(mdp, spec, nullptr, true, true);
}

ValueTables evaluate_policy(const TabularMDP& mdp, const Policy& pi) {
    const Dims d = mdp.dims();
    ValueTables vt(d);
    for (int h = d.H - 1; h >= 0; --h)
        for (int s = 0; s < d.S; ++s) {
            for (int a = 0; a < d.A; ++a) {
                auto row = mdp.row(h, s, a);
                double e = 0.0;
                for (int s2 = 0; s2 < d.S; ++s2) e += row[s2] * vt.v(h + 1, s2);
                vt.q(h, s, a) = mdp.reward(h, s, a) + e;
            }
            vt.v(h, s) = vt.q(h, s, pi(h, s));
        }
    return vt;
}

ValueTables plug_in_values(const TabularMDP& nominal, const TabularMDP& kernel, const Policy& pi,
                           const RobustSpec& spec) {
    ValueTables vt = evaluate_policy(kernel, pi);
    if (spec.framework == Framework::Constrained) return vt;
    const Dims d = nominal.dims();
    for (int h = d.H - 1; h >= 0; --h)
        for (int s = 0; s < d.S; ++s) {
            const int a = pi(h, s);
            auto row = kernel.row(h, s, a);
            double e = 0.0;
            for (int s2 = 0; s2 < d.S; ++s2) e += row[s2] * vt.v(h + 1, s2);
            const double penalty =
                spec.regularizer_beta * dual::divergence(spec.divergence, row, nominal.row(h, s, a));
            vt.v(h, s) = nominal.reward(h, s, a) + e + penalty;
            vt.q(h, s, a) = vt.v(h, s);
        }
    return vt;
}

RolloutStats rollout_average(const Simulator& env, const Policy& pi, int runs, std::uint64_t seed) {
    if (runs < 1) throw std::invalid_argument("rollout_average: runs must be >= 1");
    const Dims d = env.dims();
    std::mt19937_64 rng(seed);
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < runs; ++i) {
        int s = env.reset(rng);
        double total = 0.0;
        for (int h = 0; h < d.H; ++h) {
            const Transition tr = env.step(h, s, pi(h, s), rng);
            total += tr.reward;
            s = tr.next_state;
        }
        const double delta = total - mean;
        mean += delta / (i + 1);
        m2 += delta * (total - mean);
    }
    RolloutStats st;
    st.mean = mean;
    st.runs = runs;
    st.std_error = runs > 1 ? std::sqrt(m2 / (runs - 1) / runs) : 0.0;
    return st;
}

std::vector<double> regret_curve(const TrainingLog& log, const TabularMDP& mdp, const RobustSpec& spec) {
    const Dims d = mdp.dims();
    const double v_star = robust_optimal(mdp, spec).initial_value();
    std::vector<double> curve;
    curve.reserve(log.episodes.size());
    double total = 0.0;
    const Policy* previous = nullptr;
    double gap = 0.0;
    for (const EpisodeRecord& rec : log.episodes) {
        if (rec.policy.S() != d.S || rec.policy.H() != d.H)
            throw std::invalid_argument("regret_curve: episode policy does not match the model");
        if (!previous || !(*previous == rec.policy)) {
            const double v = backward(mdp, spec, &rec.policy, false, false).initial_value();
            gap = std::max(0.0, v_star - v);
            previous = &rec.policy;
        }
        total += gap;
        curve.push_back(total);
    }
    return curve;
}

VisitationProfile visitation_profile(const TabularMDP& mdp, const Policy& pi, const RobustSpec& spec) {
    const RobustEvalResult r = backward(mdp, spec, &pi, false, true);
    return profile_from(mdp, r.worst_kernel, pi);
}

RatioReport supremal_visitation_ratio(const TabularMDP& mdp, const RobustSpec& spec,
                                      std::uint64_t budget, std::uint64_t seed) {
    if (budget < 1) throw std::invalid_argument("supremal_visitation_ratio: budget must be >= 1");
    const Dims d = mdp.dims();

    // (h, s) pairs reachable under some policy, with one representative
    // action per class of identical (row, reward).
    struct Choice {
        int h, s;
        std::vector<int> actions;
    };
    std::vector<Choice> choices;
    std::vector<char> reach(d.S, 0);
    reach[mdp.initial_state] = 1;
    for (int h = 0; h < d.H; ++h) {
        std::vector<char> next(d.S, 0);
        for (int s = 0; s < d.S; ++s) {
            if (!reach[s]) continue;
            std::map<std::pair<std::vector<double>, double>, int> classes;
            Choice c{h, s, {}};
            for (int a = 0; a < d.A; ++a) {
                auto row = mdp.row(h, s, a);
                for (int s2 = 0; s2 < d.S; ++s2)
                    if (row[s2] > 0.0) next[s2] = 1;
                auto key = std::make_pair(std::vector<double>(row.begin(), row.end()), mdp.reward(h, s, a));
                if (classes.emplace(std::move(key), a).second) c.actions.push_back(a);
            }
            if (c.actions.size() > 1) choices.push_back(std::move(c));
        }
        reach = std::move(next);
    }

    std::uint64_t space = 1;
    for (const Choice& c : choices) {
        const std::uint64_t k = c.actions.size();
        space = space > std::numeric_limits<std::uint64_t>::max() / k ? std::numeric_limits<std::uint64_t>::max()
                                                                        : space * k;
    }

    RatioReport report;
    report.policy_space = space;
    report.exact = space <= budget;
    report.value = 0.0;
    const std::uint64_t count = report.exact ? space : budget;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> digit(choices.size(), 0);
    for (std::uint64_t i = 0; i < count; ++i) {
        Policy pi(d.S, d.H, 0);
        for (std::size_t j = 0; j < choices.size(); ++j) {
            const std::size_t k = report.exact
                                      ? digit[j]
                                      : std::uniform_int_distribution<std::size_t>(0, choices[j].actions.size() - 1)(rng);
            pi.at(choices[j].h, choices[j].s) = choices[j].actions[k];
        }
        if (report.exact)
            for (std::size_t j = 0; j < choices.size(); ++j) {
                if (++digit[j] < choices[j].actions.size()) break;
                digit[j] = 0;
            }
        const VisitationProfile vp = visitation_profile(mdp, pi, spec);
        ++report.policies;
        if (report.policies == 1 || vp.ratio_sup > report.value) {
            report.value = vp.ratio_sup;
            report.argmax_policy = pi;
            report.argmax_h = vp.argmax_h;
            report.argmax_s = vp.argmax_s;
        }
    }
    return report;
}

}  // namespace orbit
