#pragma once

#include <cstdint>
#include <vector>

#include "orbit/envs.hpp"
#include "orbit/learner.hpp"
#include "orbit/model.hpp"

// Exact robust dynamic programming on a known model, Monte-Carlo rollouts,
// regret curves and visitation diagnostics.

namespace orbit {

struct RobustEvalResult {
    /// V and Q of `policy` under the robust Bellman recursion.
    ValueTables values;
    Policy policy;
    /// Model with the same rewards whose rows are the minimizing next-state
    /// distributions for every (h, s, a) given the values above.
    TabularMDP worst_kernel;

    double initial_value() const { return values.v(0, worst_kernel.initial_state); }
};

/// Robust value of a fixed policy.
RobustEvalResult robust_value_of_policy(const TabularMDP& mdp, const Policy& pi, const RobustSpec& spec);

/// Robust optimal values and a greedy optimal policy (ties to the lowest action).
RobustEvalResult robust_optimal(const TabularMDP& mdp, const RobustSpec& spec);

/// Non-robust finite-horizon evaluation.
ValueTables evaluate_policy(const TabularMDP& mdp, const Policy& pi);

/// Evaluates pi on `kernel` as an ordinary MDP, adding beta * D(kernel || nominal)
/// at each step for regularized specs. With the worst kernel of
/// robust_value_of_policy this reproduces the robust values.
ValueTables plug_in_values(const TabularMDP& nominal, const TabularMDP& kernel, const Policy& pi,
                           const RobustSpec& spec);

struct RolloutStats {
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(runs)
    int runs = 0;
};

/// Average undiscounted return of `runs` episodes; deterministic in seed.
RolloutStats rollout_average(const Simulator& env, const Policy& pi, int runs, std::uint64_t seed);

/// Cumulative sum over episodes of max(0, V*(s0) - V^{pi_k}(s0)).
std::vector<double> regret_curve(const TrainingLog& log, const TabularMDP& mdp, const RobustSpec& spec);

struct VisitationProfile {
    /// State distributions at steps 0..H-1, rows of length S.
    std::vector<std::vector<double>> d;  // nominal model
    std::vector<std::vector<double>> q;  // worst-case kernel of the policy
    double ratio_sup = 1.0;              // +infinity if q > 0 where d = 0
    int argmax_h = 0;
    int argmax_s = 0;
};

/// Worst-case mass below this is treated as zero when d = 0.
inline constexpr double kVisitationFloor = 1e-12;

VisitationProfile visitation_profile(const TabularMDP& mdp, const Policy& pi, const RobustSpec& spec);

struct RatioReport {
    double value = 1.0;
    bool exact = true;  // false when policies were sampled
    std::uint64_t policies = 0;
    std::uint64_t policy_space = 0;  // saturates at UINT64_MAX
    Policy argmax_policy;
    int argmax_h = 0;
    int argmax_s = 0;
};

/// Supremum of q/d over deterministic policies. Only actions at states
/// reachable under the nominal model matter, and actions sharing their
/// transition row and reward are interchangeable; when the remaining
/// policy count fits in `budget` every one is evaluated, otherwise `budget`
/// uniformly random policies are.
RatioReport supremal_visitation_ratio(const TabularMDP& mdp, const RobustSpec& spec,
                                      std::uint64_t budget, std::uint64_t seed = 0);

}  // namespace orbit
