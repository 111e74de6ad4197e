#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "orbit/model.hpp"

// Robust Bellman backups. Each solver computes the robust expectation
//
//   constrained:  inf { E_q[v] : D(q || p) <= rho }
//   regularized:  inf { E_q[v] + beta * D(q || p) : q in simplex }
//
// through its one-dimensional dual, and optionally returns the achieving
// worst-case distribution q. The reward term is not included.
//
// Divergences: TV(q||p) = 1/2 sum |q - p|, KL(q||p) = sum q ln(q/p),
// chi2(q||p) = sum (q - p)^2 / p.

namespace orbit::dual {

struct BackupInput {
    std::span<const double> p;  // nominal next-state distribution
    std::span<const double> v;  // next-step values, 0 <= v <= vmax
    double vmax = 0.0;
};

struct BackupOutput {
    double value = 0.0;
    std::optional<std::vector<double>> worst_dist;
    std::optional<double> dual_var;  // eta (TV), nu (KL) or clip level alpha (chi2)
};

/// Values within this distance of the minimum are treated as ties; ties are
/// broken towards the lowest state index.
inline constexpr double kTieTolerance = 1e-12;

/// Absolute tolerance on the dual variable for every 1-D search.
inline constexpr double kSearchTolerance = 1e-9;
inline constexpr int kSearchMaxIterations = 200;

BackupOutput tv_constrained(const BackupInput& in, double rho, bool want_dist = false,
                            TvScope scope = TvScope::AllStates);

/// Sort-and-shift greedy for the TV ball. Radii above 1 behave like 1 (the
/// ball then covers the whole simplex). For S = 1 returns v[0] and p.
BackupOutput tv_constrained_fast(const BackupInput& in, double rho,
                                 TvScope scope = TvScope::AllStates);

BackupOutput kl_constrained(const BackupInput& in, double rho, bool want_dist = false);
BackupOutput chi2_constrained(const BackupInput& in, double rho, bool want_dist = false);

BackupOutput tv_regularized(const BackupInput& in, double beta, bool want_dist = false,
                            TvScope scope = TvScope::AllStates);
BackupOutput kl_regularized(const BackupInput& in, double beta, bool want_dist = false);
BackupOutput chi2_regularized(const BackupInput& in, double beta, bool want_dist = false);

/// Dispatches on spec.framework x spec.divergence.
BackupOutput backup(const BackupInput& in, const RobustSpec& spec, bool want_dist = false);

/// D(q || p); +infinity when q puts mass where p has none (KL, chi2).
double divergence(Divergence d, std::span<const double> q, std::span<const double> p);

/// Primal objective of `spec` at candidate q: E_q[v] for constrained specs
/// (+infinity if q is outside the ball), E_q[v] + beta * D(q||p) for
/// regularized ones. Used to certify worst-case distributions. A constrained
/// candidate counts as feasible when D(q||p) <= rho + feasibility_tol.
double primal_objective(const BackupInput& in, const RobustSpec& spec, std::span<const double> q,
                        double feasibility_tol = 0.0);

/// Number of 1-D searches that stopped on the iteration cap instead of the
/// tolerance, process-wide.
std::uint64_t iteration_cap_hits();
void reset_iteration_cap_hits();

}  // namespace orbit::dual
