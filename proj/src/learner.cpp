#include "orbit/learner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace orbit {

std::string to_string(BonusMode m) {
    switch (m) {
    case BonusMode::Theory: return "theory";
    case BonusMode::PracticalConstant: return "constant";
    case BonusMode::PracticalCount: return "count";
    }
    return "?";
}

BonusMode parse_bonus_mode(const std::string& text) {
    if (text == "theory") return BonusMode::Theory;
    if (text == "constant" || text == "practical-constant") return BonusMode::PracticalConstant;
    if (text == "count" || text == "practical-count") return BonusMode::PracticalCount;
    throw std::invalid_argument("unknown bonus mode '" + text + "' (theory, constant, count)");
}

void BonusConfig::validate() const {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (!(c_bonus > 0.0) || !std::isfinite(c_bonus)) throw std::invalid_argument("c_bonus must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (c_mp && !(*c_mp > 0.0 && *c_mp <= 1.0)) throw std::invalid_argument("C_MP must lie in (0, 1]");
}

double bonus(const RobustSpec& spec, const BonusConfig& cfg, std::uint64_t n, const Dims& dims) {
    const double n1 = double(std::max<std::uint64_t>(n, 1));
    const double K = cfg.K;
    switch (cfg.mode) {
    case BonusMode::PracticalConstant: return cfg.c_bonus / std::sqrt(K);
    case BonusMode::PracticalCount: return cfg.c_bonus / std::sqrt(n1);
    case BonusMode::Theory: break;
    }

    const double S = dims.S, A = dims.A, H = dims.H, delta = cfg.delta;
    const double log_sahk = std::log(2.0 * S * A * H * K / delta);
    if (spec.framework == Framework::Constrained) {
        const double rho = spec.radius_rho;
        switch (spec.divergence) {
        case Divergence::TV:
            return 2.0 * H * std::sqrt(2.0 * S * S * std::log(12.0 * S * A * H * H * K * K / delta) / n1) +
                   1.0 / K;
        case Divergence::KL:
            if (!cfg.c_mp) throw std::invalid_argument("C_MP required");
            return (1.0 + 2.0 * H * std::sqrt(S) / (rho * *cfg.c_mp)) * std::sqrt(2.0 * log_sahk / n1);
        case Divergence::Chi2: {
            const double sr = std::sqrt(rho);
            return (2.0 + sr) * H *
                       std::sqrt(2.0 * S * S * std::log(192.0 * S * A * H * H * H * K * K * K / delta) / n1) +
                   (1.0 + sr) / K;
        }
        }
    } else {
        const double beta = spec.regularizer_beta;
        switch (spec.divergence) {
        case Divergence::TV: return 2.0 * H * std::sqrt(2.0 * S * log_sahk / n1);
        case Divergence::KL:
            return (1.0 + beta * std::exp(H / beta) * std::sqrt(S)) * std::sqrt(2.0 * log_sahk / n1);
        case Divergence::Chi2:
            return (2.0 * H + 3.0 * H * H / (4.0 * beta)) *
                       std::sqrt(2.0 * S * S * std::log(48.0 * S * A * H * H * H * K * K / delta) / n1) +
                   (1.0 + 4.0 * beta) / (4.0 * beta * K);
        }
    }
    throw std::invalid_argument("bonus: unknown robust spec");
}

// ---------------------------------------------------------------------------

namespace {

/// Transition statistics summed over steps.
struct PooledCounts {
    std::vector<std::uint64_t> n;  // [s][a]
    std::vector<double> P;         // [s][a][s']

    explicit PooledCounts(const EmpiricalModel& em) {
        const Dims d = em.dims();
        n.assign(std::size_t(d.S) * d.A, 0);
        P.assign(std::size_t(d.S) * d.A * d.S, 0.0);
        for (int h = 0; h < d.H; ++h)
            for (int s = 0; s < d.S; ++s)
                for (int a = 0; a < d.A; ++a) {
                    const std::uint64_t c = em.count(h, s, a);
                    if (c == 0) continue;
                    const std::size_t sa = std::size_t(s) * d.A + a;
                    n[sa] += c;
                    auto row = em.p_hat(h, s, a);
                    for (int s2 = 0; s2 < d.S; ++s2) P[sa * d.S + s2] += double(c) * row[s2];
                }
        for (std::size_t sa = 0; sa < n.size(); ++sa)
            if (n[sa] > 0)
                for (int s2 = 0; s2 < d.S; ++s2) P[sa * d.S + s2] /= double(n[sa]);
    }
};

double robust_term(const dual::BackupInput& in, const RobustSpec& spec, bool fast_tv) {
    if (fast_tv && spec.framework == Framework::Constrained && spec.divergence == Divergence::TV)
        return dual::tv_constrained_fast(in, spec.radius_rho, spec.tv_scope).value;
    return dual::backup(in, spec).value;
}

}  // namespace

Plan plan_episode(const EmpiricalModel& em, const RobustSpec& spec, const BonusConfig& cfg,
                  const PlanOptions& options, PlanMemo* memo) {
    spec.validate();
    const Dims d = em.dims();
    Plan plan{ValueTables(d), Policy(d.S, d.H), {}};
    std::optional<PooledCounts> pooled;
    if (options.pool_steps) pooled.emplace(em);
    const bool use_memo = options.memoize && memo;
    if (use_memo) memo->resize(d.cells());

    std::vector<double> v_support;
    for (int h = d.H - 1; h >= 0; --h) {
        const double cap = d.H - h;
        const auto v_next = plan.values.v_row(h + 1);
        for (int s = 0; s < d.S; ++s) {
            double best = -1.0;
            int best_a = 0;
            for (int a = 0; a < d.A; ++a) {
                const std::size_t sa = std::size_t(s) * d.A + a;
                const std::uint64_t n = pooled ? pooled->n[sa] : em.count(h, s, a);
                double q = cap;
                if (n == 0) {
                    ++plan.counters.capped_cells;
                } else {
                    const std::span<const double> p =
                        pooled ? std::span<const double>(pooled->P.data() + sa * d.S, std::size_t(d.S))
                               : em.p_hat(h, s, a);
                    const dual::BackupInput in{p, v_next, cap - 1.0};
                    double robust = 0.0;
                    if (use_memo) {
                        v_support.clear();
                        for (int s2 = 0; s2 < d.S; ++s2)
                            if (p[s2] > 0.0) v_support.push_back(v_next[s2]);
                        PlanMemo::Entry& e = memo->at(em.cell(h, s, a));
                        if (e.valid && e.n == n && e.v_on_support == v_support) {
                            robust = e.value;
                            ++plan.counters.memo_hits;
                        } else {
                            robust = robust_term(in, spec, options.fast_tv);
                            ++plan.counters.backup_calls;
                            e = {n, v_support, robust, true};
                        }
                    } else {
                        robust = robust_term(in, spec, options.fast_tv);
                        ++plan.counters.backup_calls;
                    }
                    q = std::min(em.r_hat(h, s, a) + robust + bonus(spec, cfg, n, d), cap);
                }
                plan.values.q(h, s, a) = q;
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            plan.values.v(h, s) = best;
            plan.policy.at(h, s) = best_a;
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

TrainingLog run(const Simulator& env, const RobustSpec& spec, const BonusConfig& cfg, int K,
                std::uint64_t seed, const PlanOptions& options) {
    spec.validate();
    cfg.validate();
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    const Dims d = env.dims();

    TrainingLog log;
    log.spec = spec;
    log.bonus = cfg;
    log.options = options;
    log.seed = seed;
    log.episodes.reserve(K);

    std::mt19937_64 rng(seed);
    EmpiricalModel em(d);
    PlanMemo memo;
    using clock = std::chrono::steady_clock;
    for (int k = 0; k < K; ++k) {
        const auto t0 = clock::now();
        Plan plan = plan_episode(em, spec, cfg, options, &memo);
        EpisodeRecord rec;
        try {
            int s = env.reset(rng);
            if (s < 0 || s >= d.S) throw std::out_of_range("initial state out of range");
            rec.v1_hat = plan.values.v(0, s);
            for (int h = 0; h < d.H; ++h) {
                const int a = plan.policy(h, s);
                const Transition tr = env.step(h, s, a, rng);
                if (tr.next_state < 0 || tr.next_state >= d.S)
                    throw std::out_of_range("next state out of range");
                if (!(tr.reward >= 0.0 && tr.reward <= 1.0))
                    throw std::out_of_range("reward outside [0,1]");
                rec.trajectory.steps.push_back({s, a, tr.reward});
                s = tr.next_state;
            }
            rec.trajectory.final_state = s;
        } catch (const std::exception& e) {
            log.aborted = true;
            log.abort_reason = "episode " + std::to_string(k + 1) + ": " + e.what();
            break;
        }
        em.update(rec.trajectory);
        rec.policy = std::move(plan.policy);
        rec.counters = plan.counters;
        rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        log.episodes.push_back(std::move(rec));
    }
    log.final_model = std::move(em);
    return log;
}

TrainingLog run_nonrobust_baseline(const Simulator& env, int K, const BonusConfig& cfg,
                                   std::uint64_t seed, const PlanOptions& options) {
    return run(env, RobustSpec::regularized(Divergence::TV, kNonRobustBeta), cfg, K, seed, options);
}

}  // namespace orbit
