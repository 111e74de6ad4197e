#include "orbit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "orbit/eval.hpp"

namespace orbit {

namespace pt = boost::property_tree;

namespace {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    double x = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(x))
        throw ConfigError(field + ": expected a number, got '" + text + "'");
    return x;
}

long long parse_int(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    long long x = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ConfigError(field + ": expected an integer, got '" + text + "'");
    return x;
}

std::uint64_t parse_u64(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t x = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ConfigError(field + ": expected an unsigned integer, got '" + text + "'");
    return x;
}

bool parse_bool(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(field + ": expected true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& field, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(field, item));
    if (out.empty()) throw ConfigError(field + ": empty list");
    return out;
}

template <class F>
auto wrap(const std::string& field, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(field + ": " + e.what());
    }
}

/// Calls fn(key, value) for each entry of a section and rejects keys outside `allowed`.
template <class F>
void for_keys(const std::string& section, const pt::ptree& tree, std::initializer_list<const char*> allowed, F&& fn) {
    for (const auto& [key, node] : tree) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; }) == allowed.end())
            throw ConfigError("[" + section + "] unknown key '" + key + "'");
        fn(key, node.data(), "[" + section + "] " + key);
    }
}

}  // namespace

// ---------------------------------------------------------------------------

bool operator==(const PlanOptions& a, const PlanOptions& b) {
    return a.pool_steps == b.pool_steps && a.fast_tv == b.fast_tv && a.memoize == b.memoize;
}

bool operator==(const BonusConfig& a, const BonusConfig& b) {
    return a.mode == b.mode && a.c_bonus == b.c_bonus && a.delta == b.delta && a.K == b.K && a.c_mp == b.c_mp;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.env == b.env && a.bonus == b.bonus && a.plan == b.plan && a.eval == b.eval &&
           a.settings == b.settings && a.K == b.K && a.replications == b.replications && a.seed == b.seed &&
           a.out == b.out;
}

void ExperimentConfig::validate() const {
    if (K < 1) throw ConfigError("K must be >= 1");
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (eval.runs < 1) throw ConfigError("[eval] runs must be >= 1");
    if (eval.every < 0) throw ConfigError("[eval] every must be >= 0");
    if (settings.empty()) throw ConfigError("no [setting NAME] sections");

    const std::string& n = env.name;
    if (n == "frozen-lake") {
        if (env.horizon < 1) throw ConfigError("[env] horizon must be >= 1");
        if (!(env.p_slip >= 0.0 && env.p_slip < 1.0)) throw ConfigError("[env] p_slip must lie in [0, 1)");
        if (env.map.empty()) throw ConfigError("[env] map must not be empty");
    } else if (n == "visit-ratio") {
        if (!(env.beta > 0.0 && env.beta < 2.0 / 3.0)) throw ConfigError("[env] beta must lie in (0, 2/3)");
    } else if (n == "json") {
        if (env.path.empty()) throw ConfigError("[env] path is required for the json env");
    } else if (n != "simple-rmdp") {
        throw ConfigError("[env] unknown env '" + n + "' (simple-rmdp, frozen-lake, visit-ratio, json)");
    }
    for (double x : eval.perturbations)
        if (!perturbation_in_range(env, x))
            throw ConfigError("[eval] perturbation " + format_double(x) + " out of range for env " + n);

    std::set<std::string> names;
    for (const SettingConfig& s : settings) {
        if (s.name.empty()) throw ConfigError("setting with an empty name");
        if (!names.insert(s.name).second) throw ConfigError("duplicate setting '" + s.name + "'");
        if (!s.nonrobust) wrap("[setting " + s.name + "]", [&] { s.spec.validate(); return 0; });
        wrap("[setting " + s.name + "]", [&] { bonus_for(s).validate(); return 0; });
    }
}

BonusConfig ExperimentConfig::bonus_for(const SettingConfig& s) const {
    BonusConfig b = bonus;
    b.K = K;
    if (s.c_bonus) b.c_bonus = *s.c_bonus;
    return b;
}

const SettingConfig& ExperimentConfig::setting(const std::string& name) const {
    for (const SettingConfig& s : settings)
        if (s.name == name) return s;
    throw ConfigError("no setting named '" + name + "'");
}

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config syntax error at line " + std::to_string(e.line()) + ": " + e.message());
    }

    ExperimentConfig cfg;
    cfg.settings.clear();
    for (const auto& [section, node] : tree) {
        if (!node.data().empty() && node.empty())
            throw ConfigError("key '" + section + "' outside any section");
        if (section == "experiment") {
            for_keys(section, node, {"env", "K", "replications", "seed", "out"},
                     [&](const std::string& k, const std::string& v, const std::string& f) {
                         if (k == "env") cfg.env.name = trim(v);
                         if (k == "K") cfg.K = int(parse_int(f, v));
                         if (k == "replications") cfg.replications = int(parse_int(f, v));
                         if (k == "seed") cfg.seed = parse_u64(f, v);
                         if (k == "out") cfg.out = trim(v);
                     });
        } else if (section == "env") {
            for_keys(section, node, {"beta", "horizon", "p_slip", "map", "path"},
                     [&](const std::string& k, const std::string& v, const std::string& f) {
                         if (k == "beta") cfg.env.beta = parse_double(f, v);
                         if (k == "horizon") cfg.env.horizon = int(parse_int(f, v));
                         if (k == "p_slip") cfg.env.p_slip = parse_double(f, v);
                         if (k == "map") cfg.env.map = trim(v);
                         if (k == "path") cfg.env.path = trim(v);
                     });
        } else if (section == "bonus") {
            for_keys(section, node, {"mode", "c_bonus", "delta", "c_mp"},
                     [&](const std::string& k, const std::string& v, const std::string& f) {
                         if (k == "mode") cfg.bonus.mode = wrap(f, [&] { return parse_bonus_mode(trim(v)); });
                         if (k == "c_bonus") cfg.bonus.c_bonus = parse_double(f, v);
                         if (k == "delta") cfg.bonus.delta = parse_double(f, v);
                         if (k == "c_mp") cfg.bonus.c_mp = parse_double(f, v);
                     });
        } else if (section == "plan") {
            for_keys(section, node, {"pool_steps", "fast_tv", "memoize"},
                     [&](const std::string& k, const std::string& v, const std::string& f) {
                         if (k == "pool_steps") cfg.plan.pool_steps = parse_bool(f, v);
                         if (k == "fast_tv") cfg.plan.fast_tv = parse_bool(f, v);
                         if (k == "memoize") cfg.plan.memoize = parse_bool(f, v);
                     });
        } else if (section == "eval") {
            for_keys(section, node, {"runs", "perturbations", "every"},
                     [&](const std::string& k, const std::string& v, const std::string& f) {
                         if (k == "runs") cfg.eval.runs = int(parse_int(f, v));
                         if (k == "perturbations") cfg.eval.perturbations = parse_list(f, v);
                         if (k == "every") cfg.eval.every = int(parse_int(f, v));
                     });
        } else if (section.rfind("setting ", 0) == 0) {
            SettingConfig s;
            s.name = trim(section.substr(8));
            std::optional<double> rho, beta;
            std::string framework, divergence = "TV", scope = "all";
            for_keys(section, node, {"framework", "divergence", "rho", "beta", "tv_scope", "c_bonus"},
                     [&](const std::string& k, const std::string& v, const std::string& f) {
                         if (k == "framework") framework = trim(v);
                         if (k == "divergence") divergence = trim(v);
                         if (k == "rho") rho = parse_double(f, v);
                         if (k == "beta") beta = parse_double(f, v);
                         if (k == "tv_scope") scope = trim(v);
                         if (k == "c_bonus") s.c_bonus = parse_double(f, v);
                     });
            const std::string where = "[" + section + "]";
            if (framework.empty()) throw ConfigError(where + " framework is required");
            if (framework == "nonrobust") {
                if (rho || beta) throw ConfigError(where + " a nonrobust setting takes no rho or beta");
                s.nonrobust = true;
            } else {
                const Framework fw = wrap(where + " framework", [&] { return parse_framework(framework); });
                const Divergence dv = wrap(where + " divergence", [&] { return parse_divergence(divergence); });
                const TvScope sc = wrap(where + " tv_scope", [&] { return parse_tv_scope(scope); });
                if (fw == Framework::Constrained) {
                    if (!rho) throw ConfigError(where + " rho is required");
                    if (beta) throw ConfigError(where + " beta is not used by a constrained setting");
                    s.spec = RobustSpec::constrained(dv, *rho, sc);
                } else {
                    if (!beta) throw ConfigError(where + " beta is required");
                    if (rho) throw ConfigError(where + " rho is not used by a regularized setting");
                    s.spec = RobustSpec::regularized(dv, *beta, sc);
                }
            }
            cfg.settings.push_back(std::move(s));
        } else {
            throw ConfigError("unknown section [" + section + "]");
        }
    }
    cfg.bonus.K = cfg.K;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "[experiment]\n"
       << "env = " << cfg.env.name << "\n"
       << "K = " << cfg.K << "\n"
       << "replications = " << cfg.replications << "\n"
       << "seed = " << cfg.seed << "\n"
       << "out = " << cfg.out << "\n\n";

    os << "[env]\n";
    if (cfg.env.name == "visit-ratio") os << "beta = " << format_double(cfg.env.beta) << "\n";
    if (cfg.env.name == "frozen-lake")
        os << "horizon = " << cfg.env.horizon << "\n"
           << "p_slip = " << format_double(cfg.env.p_slip) << "\n"
           << "map = " << cfg.env.map << "\n";
    if (cfg.env.name == "json") os << "path = " << cfg.env.path << "\n";
    os << "\n";

    os << "[bonus]\n"
       << "mode = " << to_string(cfg.bonus.mode) << "\n"
       << "c_bonus = " << format_double(cfg.bonus.c_bonus) << "\n"
       << "delta = " << format_double(cfg.bonus.delta) << "\n";
    if (cfg.bonus.c_mp) os << "c_mp = " << format_double(*cfg.bonus.c_mp) << "\n";
    os << "\n";

    auto b = [](bool x) { return x ? "true" : "false"; };
    os << "[plan]\n"
       << "pool_steps = " << b(cfg.plan.pool_steps) << "\n"
       << "fast_tv = " << b(cfg.plan.fast_tv) << "\n"
       << "memoize = " << b(cfg.plan.memoize) << "\n\n";

    os << "[eval]\n"
       << "runs = " << cfg.eval.runs << "\n"
       << "every = " << cfg.eval.every << "\n"
       << "perturbations = ";
    for (std::size_t i = 0; i < cfg.eval.perturbations.size(); ++i)
        os << (i ? ", " : "") << format_double(cfg.eval.perturbations[i]);
    os << "\n";

    for (const SettingConfig& s : cfg.settings) {
        os << "\n[setting " << s.name << "]\n";
        if (s.nonrobust) {
            os << "framework = nonrobust\n";
        } else {
            os << "framework = " << to_string(s.spec.framework) << "\n"
               << "divergence = " << to_string(s.spec.divergence) << "\n";
            if (s.spec.framework == Framework::Constrained)
                os << "rho = " << format_double(s.spec.radius_rho) << "\n";
            else
                os << "beta = " << format_double(s.spec.regularizer_beta) << "\n";
            if (s.spec.divergence == Divergence::TV) os << "tv_scope = " << to_string(s.spec.tv_scope) << "\n";
        }
        if (s.c_bonus) os << "c_bonus = " << format_double(*s.c_bonus) << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------

namespace {

SettingConfig nonrobust(const std::string& name, std::optional<double> c = {}) {
    SettingConfig s;
    s.name = name;
    s.nonrobust = true;
    s.c_bonus = c;
    return s;
}

SettingConfig robust(const std::string& name, RobustSpec spec, std::optional<double> c = {}) {
    SettingConfig s;
    s.name = name;
    s.spec = spec;
    s.c_bonus = c;
    return s;
}

std::vector<double> grid(double hi, double step) {
    std::vector<double> g;
    const int n = int(std::lround(hi / step));
    for (int i = 0; i <= n; ++i) g.push_back(std::round(i * step * 1e6) / 1e6);
    return g;
}

}  // namespace

std::vector<std::string> preset_names() { return {"paper-a1", "paper-a2", "paper-a3"}; }

ExperimentConfig preset(const std::string& name) {
    using D = Divergence;
    ExperimentConfig cfg;
    cfg.settings.clear();
    if (name == "paper-a1") {
        cfg.env.name = "visit-ratio";
        cfg.env.beta = 0.1;
        cfg.K = 1000;
        cfg.replications = 10;
        cfg.bonus.c_bonus = 1.0;
        cfg.eval.perturbations = {0.0, 1.0};
        cfg.settings = {robust("constrained-tv", RobustSpec::constrained(D::TV, kVisitRatioRadius, TvScope::NominalSupport))};
        cfg.out = "results-a1";
    } else if (name == "paper-a2") {
        cfg.env.name = "simple-rmdp";
        cfg.K = 1000;
        cfg.replications = 10;
        cfg.bonus.c_bonus = 1.0;
        cfg.eval.perturbations = grid(1.0, 0.05);
        cfg.settings = {
            nonrobust("non-robust"),
            robust("constrained-tv", RobustSpec::constrained(D::TV, 0.5)),
            robust("constrained-kl", RobustSpec::constrained(D::KL, 0.5)),
            robust("constrained-chi2", RobustSpec::constrained(D::Chi2, 1.0)),
            robust("regularized-tv", RobustSpec::regularized(D::TV, 0.1)),
            robust("regularized-kl", RobustSpec::regularized(D::KL, 0.1)),
            robust("regularized-chi2", RobustSpec::regularized(D::Chi2, 0.1)),
        };
        cfg.out = "results-a2";
    } else if (name == "paper-a3") {
        cfg.env.name = "frozen-lake";
        cfg.env.horizon = 25;
        cfg.env.p_slip = 0.1;
        cfg.K = 1000;
        cfg.replications = 5;
        cfg.bonus.c_bonus = 0.001;
        cfg.plan.memoize = true;
        cfg.eval.perturbations = grid(0.3, 0.05);
        cfg.settings = {
            nonrobust("non-robust"),
            robust("constrained-tv", RobustSpec::constrained(D::TV, 0.15)),
            robust("constrained-kl", RobustSpec::constrained(D::KL, 0.15), 0.01),
            robust("constrained-chi2", RobustSpec::constrained(D::Chi2, 0.5), 0.01),
            robust("regularized-tv", RobustSpec::regularized(D::TV, 0.1), 0.003),
            robust("regularized-kl", RobustSpec::regularized(D::KL, 0.1)),
            robust("regularized-chi2", RobustSpec::regularized(D::Chi2, 0.05), 0.01),
        };
        cfg.out = "results-a3";
    } else {
        std::string known;
        for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "' (" + known + ")");
    }
    cfg.bonus.K = cfg.K;
    return cfg;
}

// ---------------------------------------------------------------------------

bool perturbation_in_range(const EnvConfig& env, double x) {
    if (env.name == "frozen-lake") return x >= 0.0 && x < 1.0;
    if (env.name == "json") return x == 0.0;
    return x >= 0.0 && x <= 1.0;
}

EnvInstance make_env(const EnvConfig& env, double perturbation) {
    if (!perturbation_in_range(env, perturbation))
        throw ConfigError("perturbation " + format_double(perturbation) + " out of range for env " + env.name);
    if (env.name == "simple-rmdp") return build_simple_rmdp(perturbation);
    if (env.name == "visit-ratio") {
        const VisitRatioEnv v = build_visit_ratio_env(env.beta);
        TabularMDP m = visit_ratio_target(v, perturbation);
        auto sim = std::make_shared<TabularSimulator>(m);
        return {std::move(m), std::move(sim)};
    }
    if (env.name == "frozen-lake") {
        GridMap map;
        if (env.map == "default") {
            map = default_frozen_lake_map();
        } else {
            std::ifstream in(env.map);
            if (!in) throw ConfigError("[env] map: cannot read '" + env.map + "'");
            std::stringstream ss;
            ss << in.rdbuf();
            map = wrap("[env] map", [&] { return parse_map(ss.str()); });
        }
        return build_frozen_lake(map, env.horizon, env.p_slip, perturbation);
    }
    if (env.name == "json") {
        std::ifstream in(env.path);
        if (!in) throw ConfigError("[env] path: cannot read '" + env.path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        TabularMDP m = wrap("[env] path", [&] { return mdp_from_json_text(ss.str()); });
        auto sim = wrap("[env] path", [&] { return std::make_shared<TabularSimulator>(m); });
        return {std::move(m), std::move(sim)};
    }
    throw ConfigError("[env] unknown env '" + env.name + "'");
}

std::uint64_t train_seed(const ExperimentConfig& cfg, int replication) {
    return derive_seed(cfg.seed, std::uint64_t(replication));
}

std::uint64_t eval_seed(std::uint64_t train_seed, int perturbation_index) {
    return derive_seed(train_seed, std::uint64_t(perturbation_index) + 1);
}

// ---------------------------------------------------------------------------

namespace {

RobustSpec effective_spec(const SettingConfig& s) {
    return s.nonrobust ? RobustSpec::regularized(Divergence::TV, kNonRobustBeta) : s.spec;
}

}  // namespace

TrainResult train_one(const ExperimentConfig& cfg, const SettingConfig& setting, int replication,
                      const EnvInstance& env) {
    const RobustSpec spec = effective_spec(setting);
    BonusConfig b = cfg.bonus_for(setting);
    if (b.mode == BonusMode::Theory && spec.framework == Framework::Constrained &&
        spec.divergence == Divergence::KL && !b.c_mp)
        b.c_mp = env.mdp.min_positive_probability();

    const std::uint64_t seed = train_seed(cfg, replication);
    TrainResult r;
    r.setting = setting.name;
    r.replication = replication;
    r.log = run(*env.sim, spec, b, cfg.K, seed, cfg.plan);
    r.log.config_echo = config_to_text(cfg);

    std::vector<double> regret;
    if (const TabularMDP* m = env.sim->model()) regret = regret_curve(r.log, *m, spec);

    r.rows.reserve(r.log.episodes.size());
    for (std::size_t k = 0; k < r.log.episodes.size(); ++k) {
        const EpisodeRecord& e = r.log.episodes[k];
        TrainRow row;
        row.episode = int(k) + 1;
        row.v1_hat = e.v1_hat;
        row.seconds = e.seconds;
        if (cfg.eval.every > 0 && (k + 1) % std::size_t(cfg.eval.every) == 0)
            row.eval_reward = rollout_average(*env.sim, e.policy, cfg.eval.runs, derive_seed(seed, 1000000 + k)).mean;
        if (!regret.empty()) row.cumulative_regret = regret[k];
        r.rows.push_back(row);
    }
    return r;
}

void parallel_for(int tasks, int jobs, const std::function<void(int)>& body) {
    if (jobs <= 0) jobs = int(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min(jobs, tasks);
    if (jobs <= 1) {
        for (int i = 0; i < tasks; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (int j = 0; j < jobs; ++j)
        workers.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < tasks;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

std::vector<TrainResult> train_all(const ExperimentConfig& cfg, int jobs) {
    cfg.validate();
    const EnvInstance env = make_env(cfg.env);
    const int R = cfg.replications;
    std::vector<TrainResult> results(cfg.settings.size() * R);
    parallel_for(int(results.size()), jobs, [&](int i) {
        results[i] = train_one(cfg, cfg.settings[i / R], i % R, env);
    });
    return results;
}

std::vector<SweepRow> sweep(const ExperimentConfig& cfg, int jobs) {
    const std::vector<TrainResult> trained = train_all(cfg, jobs);
    const int R = cfg.replications;
    const int P = int(cfg.eval.perturbations.size());
    std::vector<EnvInstance> targets;
    for (double x : cfg.eval.perturbations) targets.push_back(make_env(cfg.env, x));

    // index (setting, perturbation, replication) -> stats
    const int S = int(cfg.settings.size());
    std::vector<RolloutStats> stats(std::size_t(S) * P * R);
    parallel_for(int(stats.size()), jobs, [&](int i) {
        const int s = i / (P * R), p = (i / R) % P, r = i % R;
        const TrainResult& t = trained[std::size_t(s) * R + r];
        if (t.log.episodes.empty()) throw std::runtime_error("setting " + t.setting + " produced no episodes");
        stats[i] = rollout_average(*targets[p].sim, t.log.episodes.back().policy, cfg.eval.runs,
                                   eval_seed(train_seed(cfg, r), p));
    });

    std::vector<SweepRow> rows;
    for (int s = 0; s < S; ++s)
        for (int p = 0; p < P; ++p) {
            double sum = 0.0, sq = 0.0;
            for (int r = 0; r < R; ++r) {
                const RolloutStats& st = stats[(std::size_t(s) * P + p) * R + r];
                rows.push_back({cfg.settings[s].name, cfg.eval.perturbations[p], r, st.mean, st.std_error});
                sum += st.mean;
                sq += st.mean * st.mean;
            }
            const double mean = sum / R;
            const double var = R > 1 ? std::max(0.0, (sq - R * mean * mean) / (R - 1)) : 0.0;
            rows.push_back({cfg.settings[s].name, cfg.eval.perturbations[p], -1, mean, std::sqrt(var / R)});
        }
    return rows;
}

// ---------------------------------------------------------------------------

std::string train_csv(const TrainResult& r) {
    std::ostringstream os;
    os << kTrainCsvHeader << "\n";
    for (const TrainRow& row : r.rows) {
        os << row.episode << ',' << format_double(row.v1_hat) << ',';
        if (row.eval_reward) os << format_double(*row.eval_reward);
        os << ',';
        if (row.cumulative_regret) os << format_double(*row.cumulative_regret);
        os << ',' << format_double(row.seconds) << "\n";
    }
    return os.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << kSweepCsvHeader << "\n";
    for (const SweepRow& row : rows) {
        os << row.setting << ',' << format_double(row.perturbation) << ',';
        if (row.replication < 0)
            os << "mean";
        else
            os << row.replication;
        os << ',' << format_double(row.mean_reward) << ',' << format_double(row.stderr_value) << "\n";
    }
    return os.str();
}

}  // namespace orbit
