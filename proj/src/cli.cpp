#include "orbit/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "orbit/eval.hpp"
#include "orbit/experiment.hpp"

namespace orbit {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> K;
    std::optional<int> replications;
    int jobs = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "INI experiment file");
    cmd->add_option("--preset", f.preset, "bundled configuration (paper-a1, paper-a2, paper-a3)");
    cmd->add_option("--seed", f.seed, "base seed");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--K", f.K, "episodes per run");
    cmd->add_option("--replications", f.replications, "replications per setting");
    cmd->add_option("--jobs", f.jobs, "worker threads (0: all cores)");
}

ExperimentConfig resolve(const CommonFlags& f) {
    if (!f.config.empty() && !f.preset.empty()) throw ConfigError("--config and --preset are mutually exclusive");
    if (f.config.empty() && f.preset.empty()) throw ConfigError("one of --config or --preset is required");
    ExperimentConfig cfg = f.config.empty() ? preset(f.preset) : load_config(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.out = *f.out;
    if (f.K) cfg.K = cfg.bonus.K = *f.K;
    if (f.replications) cfg.replications = *f.replications;
    if (f.jobs < 0) throw ConfigError("--jobs must be >= 0");
    cfg.validate();
    return cfg;
}

void warn_c_mp(const ExperimentConfig& cfg, std::ostream& err) {
    if (cfg.bonus.mode != BonusMode::Theory || cfg.bonus.c_mp) return;
    for (const SettingConfig& s : cfg.settings) {
        if (s.nonrobust || s.spec.framework != Framework::Constrained || s.spec.divergence != Divergence::KL)
            continue;
        const double c = make_env(cfg.env).mdp.min_positive_probability();
        err << "note: C_MP for setting " << s.name << " taken from the nominal model: " << c << "\n";
        if (c <= 1e-6) err << "warning: C_MP = " << c << " makes the theory bonus very large\n";
    }
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

std::string file_stem(const TrainResult& r) {
    return "train_" + r.setting + "_r" + std::to_string(r.replication);
}

nlohmann::json log_json(const TrainResult& r) {
    nlohmann::json j;
    j["setting"] = r.setting;
    j["replication"] = r.replication;
    j["seed"] = r.log.seed;
    j["spec"] = r.log.spec.label();
    j["parameter"] = r.log.spec.parameter();
    j["bonus_mode"] = to_string(r.log.bonus.mode);
    j["c_bonus"] = r.log.bonus.c_bonus;
    j["episodes"] = r.log.episodes.size();
    j["aborted"] = r.log.aborted;
    j["abort_reason"] = r.log.abort_reason;
    if (!r.log.episodes.empty()) {
        const Policy& pi = r.log.episodes.back().policy;
        nlohmann::json rows = nlohmann::json::array();
        for (int h = 0; h < pi.H(); ++h) {
            std::vector<int> row(pi.S());
            for (int s = 0; s < pi.S(); ++s) row[s] = pi(h, s);
            rows.push_back(row);
        }
        j["final_policy"] = rows;
    }
    j["config"] = r.log.config_echo;
    return j;
}

int cmd_train(const CommonFlags& f, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = resolve(f);
    warn_c_mp(cfg, err);
    const auto results = train_all(cfg, f.jobs);
    fs::create_directories(cfg.out);
    int status = kExitOk;
    for (const TrainResult& r : results) {
        write_file(fs::path(cfg.out) / (file_stem(r) + ".csv"), train_csv(r));
        write_file(fs::path(cfg.out) / (file_stem(r) + ".json"), log_json(r).dump(2) + "\n");
        out << r.setting << " replication " << r.replication << ": " << r.log.episodes.size() << " episodes";
        if (!r.rows.empty()) {
            out << ", final v1_hat " << r.rows.back().v1_hat;
            if (r.rows.back().cumulative_regret) out << ", regret " << *r.rows.back().cumulative_regret;
        }
        out << "\n";
        if (r.log.aborted) {
            err << "error: " << r.setting << " replication " << r.replication << " aborted: " << r.log.abort_reason
                << "\n";
            status = kExitCheckFailed;
        }
    }
    out << "wrote " << results.size() << " logs to " << cfg.out << "\n";
    return status;
}

int cmd_sweep(const CommonFlags& f, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = resolve(f);
    warn_c_mp(cfg, err);
    const auto rows = sweep(cfg, f.jobs);
    fs::create_directories(cfg.out);
    write_file(fs::path(cfg.out) / "sweep.csv", sweep_csv(rows));
    out << std::left << std::setw(20) << "setting" << std::setw(14) << "perturbation" << "mean_reward\n";
    for (const SweepRow& r : rows)
        if (r.replication < 0)
            out << std::setw(20) << r.setting << std::setw(14) << r.perturbation << r.mean_reward << "\n";
    out << "wrote " << (fs::path(cfg.out) / "sweep.csv").string() << "\n";
    return kExitOk;
}

int cmd_ratio(const CommonFlags& f, const std::string& setting_name, std::uint64_t budget, std::ostream& out) {
    const ExperimentConfig cfg = resolve(f);
    const SettingConfig* setting = nullptr;
    if (setting_name.empty()) {
        for (const SettingConfig& s : cfg.settings)
            if (!s.nonrobust) {
                setting = &s;
                break;
            }
        if (!setting) throw ConfigError("ratio needs a robust setting");
    } else {
        setting = &cfg.setting(setting_name);
        if (setting->nonrobust) throw ConfigError("ratio needs a robust setting, '" + setting_name + "' is nonrobust");
    }
    if (budget < 1) throw ConfigError("--budget must be >= 1");
    const EnvInstance env = make_env(cfg.env);
    const RatioReport rep = supremal_visitation_ratio(env.mdp, setting->spec, budget, cfg.seed);

    out << "C_vr = " << std::setprecision(12) << rep.value << " (" << (rep.exact ? "exact" : "approximate") << ", "
        << rep.policies << " of " << rep.policy_space << " policies)\n";
    out << "attained at step " << rep.argmax_h + 1 << ", state " << rep.argmax_s << "\n";
    fs::create_directories(cfg.out);
    std::ostringstream csv;
    csv << "setting,c_vr,exact,policies,policy_space,argmax_h,argmax_s\n"
        << setting->name << ',' << std::setprecision(17) << rep.value << ',' << (rep.exact ? "true" : "false") << ','
        << rep.policies << ',' << rep.policy_space << ',' << rep.argmax_h << ',' << rep.argmax_s << "\n";
    write_file(fs::path(cfg.out) / "ratio.csv", csv.str());
    return kExitOk;
}

int cmd_duals_check(int samples, std::uint64_t seed, double tol, const dual::BackupSolver& solver,
                    std::ostream& out, std::ostream& err) {
    if (samples < 0) throw ConfigError("--samples must be >= 0");
    if (!(tol > 0.0)) throw ConfigError("--tolerance must be > 0");
    if (samples == 0) {
        err << "warning: samples = 0, nothing was checked\n";
        out << "duals-check: PASS (vacuous)\n";
        return kExitOk;
    }
    const dual::DualsCheckReport rep = dual::duals_check(samples, seed, tol, solver);
    for (const dual::SettingGap& g : rep.settings)
        out << std::left << std::setw(12) << g.label << " worst gap " << std::scientific << std::setprecision(3)
            << g.worst_gap << std::defaultfloat << "  failures " << g.failures << "/" << samples << "\n";
    out << "duals-check: " << (rep.passed() ? "PASS" : "FAIL") << " (" << samples << " samples, tolerance " << tol
        << ")\n";
    return rep.passed() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const dual::BackupSolver& solver) {
    CLI::App app{"Optimistic robust value iteration experiments"};
    app.require_subcommand(1);

    CommonFlags train_f, sweep_f, ratio_f, echo_f;
    auto* train = app.add_subcommand("train", "train every setting and write per-episode logs");
    add_common(train, train_f);
    auto* sweep_cmd = app.add_subcommand("sweep", "train, then evaluate final policies over the perturbation grid");
    add_common(sweep_cmd, sweep_f);
    auto* ratio = app.add_subcommand("ratio", "supremal visitation ratio of the training environment");
    add_common(ratio, ratio_f);
    std::string ratio_setting;
    std::uint64_t budget = 1000000;
    ratio->add_option("--setting", ratio_setting, "setting name (default: first robust setting)");
    ratio->add_option("--budget", budget, "maximum number of policies evaluated");
    auto* echo = app.add_subcommand("config-echo", "print the resolved configuration");
    add_common(echo, echo_f);

    auto* duals = app.add_subcommand("duals-check", "compare the dual solvers with the brute-force oracle");
    int samples = 200;
    std::uint64_t duals_seed = 0;
    double tol = 2e-3;
    duals->add_option("--samples", samples, "random instances per setting");
    duals->add_option("--seed", duals_seed, "seed");
    duals->add_option("--tolerance", tol, "maximum absolute gap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return e.get_exit_code() == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (*train) return cmd_train(train_f, out, err);
        if (*sweep_cmd) return cmd_sweep(sweep_f, out, err);
        if (*ratio) return cmd_ratio(ratio_f, ratio_setting, budget, out);
        if (*duals) return cmd_duals_check(samples, duals_seed, tol, solver, out, err);
        if (*echo) {
            out << config_to_text(resolve(echo_f));
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}

}  // namespace orbit
