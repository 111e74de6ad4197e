#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "orbit/dual.hpp"

// Brute-force primal solver for the six robust backups, used to cross-check
// the dual solvers. It never touches a dual variable: it only evaluates
// E_q[v] (+ beta * D(q||p)) at candidate points q of the simplex.

namespace orbit::dual {

/// Largest state count the oracle accepts.
inline constexpr int kOracleMaxStates = 6;

/// Minimizes the primal objective of `spec` over the simplex. Candidates are
/// restricted to supp(p) for KL, chi2 and support-scoped TV. Small problems
/// are enumerated on the full grid of step `resolution`; larger ones start
/// from a coarse full grid and are refined by local grid searches whose step
/// is halved until it is well below `resolution`. The nominal row p is
/// always a candidate, so a zero radius yields E_p[v]. Deterministic.
///
/// Throws std::invalid_argument if p has more than kOracleMaxStates entries.
double oracle(const BackupInput& in, const RobustSpec& spec, double resolution = 1e-3);

/// A random backup problem: p has 2..5 states with occasional zero entries
/// (at least one positive), v is uniform on [0, vmax].
struct RandomBackup {
    std::vector<double> p;
    std::vector<double> v;
    double vmax = 3.0;

    BackupInput input() const { return {p, v, vmax}; }
};

RandomBackup random_backup(std::mt19937_64& rng, int S, double vmax = 3.0);

using BackupSolver = std::function<BackupOutput(const BackupInput&, const RobustSpec&)>;

struct SettingGap {
    std::string label;
    double worst_gap = 0.0;
    int failures = 0;
};

struct DualsCheckReport {
    int samples = 0;
    double tolerance = 0.0;
    std::vector<SettingGap> settings;

    bool passed() const;
};

/// Runs `samples` random instances (S in 2..5, v in [0,3]) through each of the
/// six settings with rho in {0.1, 0.3, 1.0} or beta in {0.1, 0.5, 2.0} and
/// compares `solver` against the oracle. An empty solver means `backup`.
DualsCheckReport duals_check(int samples, std::uint64_t seed, double tolerance = 2e-3,
                             const BackupSolver& solver = {});

}  // namespace orbit::dual
