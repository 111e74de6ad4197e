#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "orbit/dual.hpp"
#include "orbit/learner.hpp"

using namespace orbit;

namespace {

const Dims kDims{2, 2, 3};

BonusConfig constant_bonus(double c, int K) {
    BonusConfig b;
    b.mode = BonusMode::PracticalConstant;
    b.c_bonus = c;
    b.K = K;
    return b;
}

/// Two-state chain where action a moves to state a; reward table r(h,s,a).
double chain_reward(int h, int s, int a) { return 0.1 * (1 + h) * (s == 1) + 0.2 * a; }

/// Trajectory that reaches (h, s) and takes action a there.
Trajectory chain_trajectory(int h, int s, int a) {
    Trajectory t;
    int state = h == 0 ? s : 0;
    for (int k = 0; k < kDims.H; ++k) {
        int action = 0;
        if (k == h - 1) action = s;
        if (k == h) action = a;
        t.steps.push_back({state, action, chain_reward(k, state, action)});
        state = action;
    }
    t.final_state = state;
    return t;
}

EmpiricalModel fully_observed_chain() {
    EmpiricalModel em(kDims);
    for (int h = 0; h < kDims.H; ++h)
        for (int s = 0; s < kDims.S; ++s)
            for (int a = 0; a < kDims.A; ++a) em.update(chain_trajectory(h, s, a));
    return em;
}

class FaultySimulator final : public Simulator {
public:
    enum class Fault { Throw, BadReward, BadState };
    FaultySimulator(int fail_at_call, Fault f) : fail_at_(fail_at_call), fault_(f) {}
    Dims dims() const override { return {2, 2, 2}; }
    int reset(std::mt19937_64&) const override { return 0; }
    Transition step(int, int, int a, std::mt19937_64&) const override {
        if (++calls_ == fail_at_) {
            if (fault_ == Fault::Throw) throw std::runtime_error("simulator fault");
            if (fault_ == Fault::BadReward) return {0, 2.0};
            return {7, 0.0};
        }
        return {a, 0.5};
    }

private:
    int fail_at_;
    Fault fault_;
    mutable int calls_ = 0;
};

}  // namespace

// ---- bonus ---------------------------------------------------------------

TEST(Bonus, TheoryConstrainedTv) {
    BonusConfig cfg;
    cfg.mode = BonusMode::Theory;
    cfg.delta = 0.1;
    cfg.K = 100;
    const double expected = 2.0 * 3.0 * std::sqrt(2.0 * 4.0 * std::log(12.0 * 2 * 2 * 9 * 1e4 / 0.1)) + 1.0 / 100;
    EXPECT_NEAR(bonus(RobustSpec::constrained(Divergence::TV, 0.5), cfg, 0, kDims), expected, 1e-12);
    EXPECT_NEAR(bonus(RobustSpec::constrained(Divergence::TV, 0.5), cfg, 1, kDims), expected, 1e-12);
}

TEST(Bonus, PracticalModes) {
    const RobustSpec spec = RobustSpec::regularized(Divergence::KL, 0.1);
    EXPECT_NEAR(bonus(spec, constant_bonus(0.001, 1000), 0, kDims), 3.1623e-5, 1e-9);
    EXPECT_NEAR(bonus(spec, constant_bonus(0.001, 1000), 500, kDims), 3.1623e-5, 1e-9);
    BonusConfig count;
    count.mode = BonusMode::PracticalCount;
    count.c_bonus = 2.0;
    EXPECT_DOUBLE_EQ(bonus(spec, count, 0, kDims), 2.0);
    EXPECT_DOUBLE_EQ(bonus(spec, count, 16, kDims), 0.5);
}

TEST(Bonus, NonIncreasingInCount) {
    const std::vector<RobustSpec> specs{
        RobustSpec::constrained(Divergence::TV, 0.3), RobustSpec::constrained(Divergence::KL, 0.3),
        RobustSpec::constrained(Divergence::Chi2, 0.3), RobustSpec::regularized(Divergence::TV, 0.5),
        RobustSpec::regularized(Divergence::KL, 0.5), RobustSpec::regularized(Divergence::Chi2, 0.5)};
    for (BonusMode mode : {BonusMode::Theory, BonusMode::PracticalConstant, BonusMode::PracticalCount})
        for (const RobustSpec& spec : specs) {
            BonusConfig cfg;
            cfg.mode = mode;
            cfg.K = 50;
            cfg.c_mp = 0.1;
            double prev = bonus(spec, cfg, 0, kDims);
            for (std::uint64_t n = 1; n < 300; n += 7) {
                const double b = bonus(spec, cfg, n, kDims);
                EXPECT_LE(b, prev) << spec.label() << " " << to_string(mode) << " n=" << n;
                prev = b;
            }
        }
}

TEST(Bonus, ConstrainedKlTheoryNeedsCmp) {
    BonusConfig cfg;
    cfg.mode = BonusMode::Theory;
    cfg.K = 10;
    try {
        bonus(RobustSpec::constrained(Divergence::KL, 0.2), cfg, 3, kDims);
        FAIL() << "expected an error";
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "C_MP required");
    }
    cfg.c_mp = 0.25;
    EXPECT_GT(bonus(RobustSpec::constrained(Divergence::KL, 0.2), cfg, 3, kDims), 0.0);
}

TEST(BonusConfig, Validation) {
    BonusConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.K = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.delta = 1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.c_bonus = 0.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.c_mp = 0.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    EXPECT_EQ(parse_bonus_mode("count"), BonusMode::PracticalCount);
    EXPECT_EQ(to_string(BonusMode::Theory), "theory");
    EXPECT_THROW(parse_bonus_mode("huge"), std::invalid_argument);
}

// ---- planning ------------------------------------------------------------

TEST(PlanEpisode, EmptyModelIsOptimistic) {
    const EmpiricalModel em(kDims);
    const Plan plan = plan_episode(em, RobustSpec::constrained(Divergence::TV, 0.1), constant_bonus(1.0, 10));
    for (int h = 0; h < kDims.H; ++h)
        for (int s = 0; s < kDims.S; ++s) {
            for (int a = 0; a < kDims.A; ++a) EXPECT_EQ(plan.values.q(h, s, a), kDims.H - h);
            EXPECT_EQ(plan.policy(h, s), 0);
        }
    EXPECT_EQ(plan.values.v(0, 0), kDims.H);
    EXPECT_EQ(plan.counters.capped_cells, kDims.cells());
    EXPECT_EQ(plan.counters.backup_calls, 0u);
}

TEST(PlanEpisode, TinyRadiusMatchesClassicalBackup) {
    const EmpiricalModel em = fully_observed_chain();
    const Plan plan = plan_episode(em, RobustSpec::constrained(Divergence::TV, 1e-12), constant_bonus(1e-12, 1));
    std::vector<double> V(kDims.S, 0.0);
    for (int h = kDims.H - 1; h >= 0; --h) {
        std::vector<double> next(kDims.S);
        for (int s = 0; s < kDims.S; ++s) {
            double best = -1.0;
            for (int a = 0; a < kDims.A; ++a) {
                const double q = chain_reward(h, s, a) + V[a];
                EXPECT_NEAR(plan.values.q(h, s, a), q, 1e-6) << h << s << a;
                best = std::max(best, q);
            }
            next[s] = best;
        }
        V = next;
    }
    EXPECT_NEAR(plan.values.v(0, 0), V[0], 1e-6);
    EXPECT_EQ(plan.counters.backup_calls, kDims.cells());
}

TEST(PlanEpisode, SingleCellReproducesUpdate) {
    EmpiricalModel em(kDims);
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> u(0, 1);
    for (int i = 0; i < 200; ++i) {
        Trajectory t;
        for (int h = 0; h < kDims.H; ++h) t.steps.push_back({u(rng), u(rng), 0.25 * u(rng)});
        t.final_state = u(rng);
        em.update(t);
    }
    const RobustSpec spec = RobustSpec::constrained(Divergence::TV, 0.2);
    const BonusConfig cfg = constant_bonus(0.05, 100);
    const Plan plan = plan_episode(em, spec, cfg);
    const int h = 1, s = 1, a = 0;
    ASSERT_GT(em.count(h, s, a), 0u);
    const double robust = dual::tv_constrained({em.p_hat(h, s, a), plan.values.v_row(h + 1), double(kDims.H - h - 1)},
                                               0.2).value;
    EXPECT_DOUBLE_EQ(plan.values.q(h, s, a),
                     std::min(em.r_hat(h, s, a) + robust + bonus(spec, cfg, em.count(h, s, a), kDims),
                              double(kDims.H - h)));
}

TEST(PlanEpisode, QStaysWithinCap) {
    const TabularMDP m = [] {
        TabularMDP m(3, 2, 4);
        for (int h = 0; h < 4; ++h)
            for (int s = 0; s < 3; ++s)
                for (int a = 0; a < 2; ++a) {
                    m.row(h, s, a)[(s + a) % 3] = 0.7;
                    m.row(h, s, a)[(s + 2) % 3] += 0.3;
                    m.reward(h, s, a) = 0.9;
                }
        return m;
    }();
    const TabularSimulator sim(m);
    BonusConfig cfg;
    cfg.mode = BonusMode::PracticalCount;
    cfg.c_bonus = 3.0;
    const TrainingLog log = run(sim, RobustSpec::regularized(Divergence::Chi2, 0.3), cfg, 20, 1);
    const Plan plan = plan_episode(log.final_model, RobustSpec::regularized(Divergence::Chi2, 0.3), cfg);
    for (int h = 0; h < 4; ++h)
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 2; ++a) {
                EXPECT_GE(plan.values.q(h, s, a), 0.0);
                EXPECT_LE(plan.values.q(h, s, a), 4 - h);
            }
}

TEST(PlanEpisode, CountersCoverEveryCell) {
    const EmpiricalModel em = fully_observed_chain();
    EmpiricalModel partial(kDims);
    partial.update(chain_trajectory(1, 1, 1));
    PlanMemo memo;
    PlanOptions opt;
    opt.memoize = true;
    const RobustSpec spec = RobustSpec::constrained(Divergence::KL, 0.3);
    for (const EmpiricalModel* m : std::initializer_list<const EmpiricalModel*>{&partial, &em, &em}) {
        const Plan p = plan_episode(*m, spec, constant_bonus(0.1, 10), opt, &memo);
        EXPECT_EQ(p.counters.backup_calls + p.counters.capped_cells + p.counters.memo_hits, kDims.cells());
    }
    const Plan again = plan_episode(em, spec, constant_bonus(0.1, 10), opt, &memo);
    EXPECT_EQ(again.counters.memo_hits, kDims.cells());
    EXPECT_EQ(again.values, plan_episode(em, spec, constant_bonus(0.1, 10)).values);
}

TEST(PlanEpisode, FastTvMatchesDual) {
    const EmpiricalModel em = fully_observed_chain();
    PlanOptions fast;
    fast.fast_tv = true;
    const RobustSpec spec = RobustSpec::constrained(Divergence::TV, 0.3);
    const Plan a = plan_episode(em, spec, constant_bonus(0.1, 10));
    const Plan b = plan_episode(em, spec, constant_bonus(0.1, 10), fast);
    for (std::size_t i = 0; i < a.values.Q.size(); ++i) EXPECT_NEAR(a.values.Q[i], b.values.Q[i], 1e-9);
}

TEST(PlanEpisode, PooledStepsShareTransitions) {
    EmpiricalModel em(kDims);
    em.update(chain_trajectory(0, 0, 1));  // visits (0,0,1), (1,1,0), (2,0,0)
    PlanOptions pooled;
    pooled.pool_steps = true;
    const RobustSpec spec = RobustSpec::constrained(Divergence::TV, 0.1);
    EXPECT_EQ(plan_episode(em, spec, constant_bonus(0.1, 1)).counters.backup_calls, 3u);
    EXPECT_EQ(plan_episode(em, spec, constant_bonus(0.1, 1), pooled).counters.backup_calls, 9u);
}

// ---- run -----------------------------------------------------------------

TEST(Run, FirstEpisodeFollowsOptimisticPolicy) {
    const TabularMDP m = [] {
        TabularMDP m(2, 2, 2);
        for (int h = 0; h < 2; ++h)
            for (int s = 0; s < 2; ++s)
                for (int a = 0; a < 2; ++a) m.row(h, s, a)[a] = 1.0;
        return m;
    }();
    const TabularSimulator sim(m);
    const TrainingLog log = run(sim, RobustSpec::constrained(Divergence::TV, 0.1), constant_bonus(1, 1), 1, 3);
    ASSERT_EQ(log.episodes.size(), 1u);
    EXPECT_EQ(log.episodes[0].policy, Policy(2, 2, 0));
    EXPECT_EQ(log.episodes[0].v1_hat, 2.0);
    EXPECT_EQ(log.episodes[0].trajectory.steps.size(), 2u);
    EXPECT_EQ(log.episodes[0].trajectory.steps[1].state, 0);
}

TEST(Run, DeterministicInSeed) {
    const EnvInstance env = build_simple_rmdp(0.0);
    const RobustSpec spec = RobustSpec::constrained(Divergence::KL, 0.5);
    const TrainingLog a = run(*env.sim, spec, constant_bonus(1.0, 60), 60, 42);
    const TrainingLog b = run(*env.sim, spec, constant_bonus(1.0, 60), 60, 42);
    const TrainingLog c = run(*env.sim, spec, constant_bonus(1.0, 60), 60, 43);
    ASSERT_EQ(a.episodes.size(), 60u);
    bool differs = false;
    for (std::size_t k = 0; k < a.episodes.size(); ++k) {
        EXPECT_EQ(a.episodes[k].policy, b.episodes[k].policy);
        EXPECT_EQ(a.episodes[k].trajectory, b.episodes[k].trajectory);
        EXPECT_EQ(a.episodes[k].v1_hat, b.episodes[k].v1_hat);
        differs |= !(a.episodes[k].trajectory == c.episodes[k].trajectory);
    }
    EXPECT_EQ(a.final_model, b.final_model);
    EXPECT_TRUE(differs);
}

TEST(Run, MemoizationDoesNotChangeTheLog) {
    const EnvInstance env = build_simple_rmdp(0.0);
    const RobustSpec spec = RobustSpec::constrained(Divergence::Chi2, 1.0);
    PlanOptions memo;
    memo.memoize = true;
    const TrainingLog a = run(*env.sim, spec, constant_bonus(1.0, 80), 80, 5);
    const TrainingLog b = run(*env.sim, spec, constant_bonus(1.0, 80), 80, 5, memo);
    std::uint64_t hits = 0;
    for (std::size_t k = 0; k < a.episodes.size(); ++k) {
        EXPECT_EQ(a.episodes[k].trajectory, b.episodes[k].trajectory);
        EXPECT_EQ(a.episodes[k].v1_hat, b.episodes[k].v1_hat);
        hits += b.episodes[k].counters.memo_hits;
    }
    EXPECT_GT(hits, 0u);
}

TEST(Run, BaselineIsLargeBetaRegularizedTv) {
    const EnvInstance env = build_simple_rmdp(0.0);
    const TrainingLog a = run_nonrobust_baseline(*env.sim, 50, constant_bonus(1.0, 50), 9);
    const TrainingLog b =
        run(*env.sim, RobustSpec::regularized(Divergence::TV, 10000.0), constant_bonus(1.0, 50), 50, 9);
    for (std::size_t k = 0; k < a.episodes.size(); ++k) {
        EXPECT_EQ(a.episodes[k].trajectory, b.episodes[k].trajectory);
        EXPECT_EQ(a.episodes[k].v1_hat, b.episodes[k].v1_hat);
    }
}

TEST(Run, LargeBetaBackupIsPlainExpectation) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
    for (int i = 0; i < 50; ++i) {
        std::vector<double> v(4);
        double e = 0.0;
        for (int s = 0; s < 4; ++s) e += p[s] * (v[s] = u(rng));
        EXPECT_NEAR(dual::tv_regularized({p, v, 3.0}, kNonRobustBeta).value, e, 1e-4);
    }
}

TEST(Run, SimulatorFaultsAbortWithPartialLog) {
    using F = FaultySimulator::Fault;
    for (F f : {F::Throw, F::BadReward, F::BadState}) {
        const FaultySimulator sim(5, f);  // two steps per episode: fails in episode 3
        const TrainingLog log = run(sim, RobustSpec::constrained(Divergence::TV, 0.1), constant_bonus(1, 10), 10, 0);
        EXPECT_TRUE(log.aborted);
        EXPECT_EQ(log.episodes.size(), 2u);
        EXPECT_EQ(log.abort_reason.rfind("episode 3: ", 0), 0u) << log.abort_reason;
    }
}

TEST(Run, RejectsBadArguments) {
    const EnvInstance env = build_simple_rmdp(0.0);
    EXPECT_THROW(run(*env.sim, RobustSpec::constrained(Divergence::TV, 0.1), constant_bonus(1, 1), 0, 0),
                 std::invalid_argument);
    BonusConfig theory;
    theory.mode = BonusMode::Theory;
    EXPECT_THROW(run(*env.sim, RobustSpec::constrained(Divergence::KL, 0.1), theory, 2, 0), std::invalid_argument);
}

TEST(DeriveSeed, SplitMix64Stream) {
    EXPECT_EQ(derive_seed(0, 0), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(derive_seed(0, 1), 0x6E789E6AA1B965F4ULL);
    EXPECT_NE(derive_seed(1, 0), derive_seed(0, 0));
}
