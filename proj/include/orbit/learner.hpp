#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "orbit/dual.hpp"
#include "orbit/envs.hpp"
#include "orbit/model.hpp"

// Optimistic robust value iteration driven by online episodes.

namespace orbit {

enum class BonusMode {
    Theory,             // the per-setting concentration bonus, n v 1 in the denominator
    PracticalConstant,  // c_bonus / sqrt(K), the same for every cell
    PracticalCount,     // c_bonus / sqrt(n v 1)
};

std::string to_string(BonusMode m);
BonusMode parse_bonus_mode(const std::string& text);

struct BonusConfig {
    BonusMode mode = BonusMode::PracticalConstant;
    double c_bonus = 1.0;
    double delta = 0.1;
    int K = 1;
    /// Smallest positive nominal transition probability; needed only by the
    /// Theory bonus of the constrained KL setting.
    std::optional<double> c_mp;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Exploration bonus of a cell visited n times.
double bonus(const RobustSpec& spec, const BonusConfig& cfg, std::uint64_t n, const Dims& dims);

struct PlanOptions {
    /// Pool transition counts of the same (s,a) over all steps. Suited to
    /// time-homogeneous dynamics; rewards stay per step.
    bool pool_steps = false;
    /// Use the sort-and-shift solver for constrained TV backups.
    bool fast_tv = false;
    /// Reuse a cell's backup when its counts and next-step values are
    /// unchanged since the previous episode. Requires a PlanMemo.
    bool memoize = false;
};

struct PlanCounters {
    std::uint64_t backup_calls = 0;  // dual solver invocations
    std::uint64_t capped_cells = 0;  // unvisited cells set to the cap
    std::uint64_t memo_hits = 0;     // backups reused from the memo
};

/// Per-cell cache of the last backup, carried across episodes.
class PlanMemo {
public:
    struct Entry {
        std::uint64_t n = 0;
        std::vector<double> v_on_support;
        double value = 0.0;
        bool valid = false;
    };

    void resize(std::size_t cells) { entries_.resize(cells); }
    Entry& at(std::size_t cell) { return entries_[cell]; }

private:
    std::vector<Entry> entries_;
};

struct Plan {
    ValueTables values;
    Policy policy;
    PlanCounters counters;
};

/// One sweep of backward robust value iteration on the empirical model:
/// Q(h,s,a) = min(r_hat + backup(P_hat, V(h+1)) + bonus, H - h), or the cap
/// H - h when the cell has never been visited. Greedy policy, ties to the
/// lowest action.
Plan plan_episode(const EmpiricalModel& em, const RobustSpec& spec, const BonusConfig& cfg,
                  const PlanOptions& options = {}, PlanMemo* memo = nullptr);

struct EpisodeRecord {
    Policy policy;
    Trajectory trajectory;
    double v1_hat = 0.0;  // optimistic value at the episode's start state
    double seconds = 0.0;
    PlanCounters counters;
};

struct TrainingLog {
    RobustSpec spec;
    BonusConfig bonus;
    PlanOptions options;
    std::uint64_t seed = 0;
    std::vector<EpisodeRecord> episodes;
    EmpiricalModel final_model;
    /// Set when the simulator failed; episodes holds the completed ones.
    bool aborted = false;
    std::string abort_reason;
    std::string config_echo;
};

/// Stream seed for replication `index` of base seed `base` (splitmix64 of
/// base + golden-ratio increment * (index + 1)).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// K episodes of plan -> roll out -> update. Deterministic in `seed`.
TrainingLog run(const Simulator& env, const RobustSpec& spec, const BonusConfig& cfg, int K,
                std::uint64_t seed, const PlanOptions& options = {});

inline constexpr double kNonRobustBeta = 10000.0;

/// run() with the regularized TV spec at beta = kNonRobustBeta.
TrainingLog run_nonrobust_baseline(const Simulator& env, int K, const BonusConfig& cfg,
                                   std::uint64_t seed, const PlanOptions& options = {});

}  // namespace orbit
