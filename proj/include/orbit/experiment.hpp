#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "orbit/envs.hpp"
#include "orbit/learner.hpp"
#include "orbit/model.hpp"

// Experiment configuration, presets and the train / sweep drivers shared by
// the command-line tool and the acceptance harness.

namespace orbit {

/// Invalid or inconsistent configuration; the message names the field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Environment family and its parameters.
///   simple-rmdp   5x5x3 chain; perturbation q in [0, 1]
///   frozen-lake   grid world; perturbation p_perturb in [0, 1)
///   visit-ratio   6x10x3 chain; perturbation t in [0, 1] towards the worst case
///   json          model file; perturbation must be 0
struct EnvConfig {
    std::string name = "simple-rmdp";
    double beta = 0.1;         // visit-ratio
    int horizon = 25;          // frozen-lake
    double p_slip = 0.1;       // frozen-lake
    std::string map = "default";  // frozen-lake: "default" or a file path
    std::string path;          // json

    bool operator==(const EnvConfig&) const = default;
};

struct SettingConfig {
    std::string name;
    bool nonrobust = false;
    RobustSpec spec;
    std::optional<double> c_bonus;  // overrides [bonus] c_bonus

    bool operator==(const SettingConfig&) const = default;
};

struct EvalConfig {
    int runs = 500;
    std::vector<double> perturbations{0.0};
    /// Evaluate the episode policy every `every` episodes during training (0: off).
    int every = 0;

    bool operator==(const EvalConfig&) const = default;
};

struct ExperimentConfig {
    EnvConfig env;
    BonusConfig bonus;  // bonus.K mirrors K
    PlanOptions plan;
    EvalConfig eval;
    std::vector<SettingConfig> settings;
    int K = 1000;
    int replications = 1;
    std::uint64_t seed = 0;
    std::string out = "results";

    /// Throws ConfigError.
    void validate() const;
    /// Bonus configuration of one setting, with K and overrides applied.
    BonusConfig bonus_for(const SettingConfig& s) const;
    const SettingConfig& setting(const std::string& name) const;
};

bool operator==(const PlanOptions& a, const PlanOptions& b);
bool operator==(const BonusConfig& a, const BonusConfig& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// INI text, see README. Unknown sections or keys are errors. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical INI text; parse_config(config_to_text(c)) == c.
std::string config_to_text(const ExperimentConfig& cfg);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
ExperimentConfig preset(const std::string& name);

/// Training environment (perturbation 0 unless given).
EnvInstance make_env(const EnvConfig& env, double perturbation = 0.0);
/// Whether a perturbation value is valid for the environment family.
bool perturbation_in_range(const EnvConfig& env, double perturbation);

/// Stream seeds. Replication i trains with derive_seed(seed, i); its
/// evaluation at the j-th perturbation uses derive_seed(train_seed, j + 1)
/// and periodic training evaluation at episode k uses
/// derive_seed(train_seed, 1000000 + k).
std::uint64_t train_seed(const ExperimentConfig& cfg, int replication);
std::uint64_t eval_seed(std::uint64_t train_seed, int perturbation_index);

struct TrainRow {
    int episode = 0;  // 1-based
    double v1_hat = 0.0;
    std::optional<double> eval_reward;
    std::optional<double> cumulative_regret;
    double seconds = 0.0;
};

struct TrainResult {
    std::string setting;
    int replication = 0;
    TrainingLog log;
    std::vector<TrainRow> rows;
};

/// Trains one (setting, replication). Fills eval_reward when eval.every > 0
/// and cumulative_regret when the environment has an exact model.
TrainResult train_one(const ExperimentConfig& cfg, const SettingConfig& setting, int replication,
                      const EnvInstance& env);

struct SweepRow {
    std::string setting;
    double perturbation = 0.0;
    int replication = -1;  // -1 marks the mean over replications
    double mean_reward = 0.0;
    double stderr_value = 0.0;
};

/// Runs `tasks` jobs on up to `jobs` threads (0: hardware concurrency).
/// Each job writes only its own slot, so results do not depend on scheduling.
void parallel_for(int tasks, int jobs, const std::function<void(int)>& body);

/// Trains every (setting, replication) and writes nothing.
std::vector<TrainResult> train_all(const ExperimentConfig& cfg, int jobs);

/// Trains inline, then rolls out each final policy eval.runs times at every
/// perturbation. Rows are ordered by setting, perturbation, replication, with
/// the aggregate row last in each block.
std::vector<SweepRow> sweep(const ExperimentConfig& cfg, int jobs);

inline constexpr const char* kTrainCsvHeader = "episode,v1_hat,eval_reward,cumulative_regret,seconds";
inline constexpr const char* kSweepCsvHeader = "setting,perturbation,replication,mean_reward,stderr";

std::string train_csv(const TrainResult& r);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace orbit
