#include "orbit/dual.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace orbit::dual {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvPhi = 0.6180339887498949;  // 1 / golden ratio
constexpr double kNuFloor = 1e-12;

std::atomic<std::uint64_t> g_cap_hits{0};

void check_parameter(double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::invalid_argument(std::string(name) + " must be a finite value > 0");
}

void check_input(const BackupInput& in) {
    if (in.p.size() != in.v.size() || in.p.empty())
        throw std::invalid_argument("backup: p and v must be non-empty and of equal length");
    double mass = 0.0;
    for (double x : in.p) mass += x;
    if (!(mass > 0.0)) throw std::invalid_argument("backup: nominal row has zero mass");
}

struct Extremum {
    double value;
    int index;  // lowest index attaining value within kTieTolerance
};

/// Minimum of v over the states admitted by `support_only`.
Extremum min_over(const BackupInput& in, bool support_only) {
    double m = kInf;
    for (std::size_t s = 0; s < in.v.size(); ++s)
        if (!support_only || in.p[s] > 0.0) m = std::min(m, in.v[s]);
    for (std::size_t s = 0; s < in.v.size(); ++s)
        if ((!support_only || in.p[s] > 0.0) && in.v[s] <= m + kTieTolerance) return {m, int(s)};
    return {m, -1};
}

double support_max(const BackupInput& in) {
    double M = -kInf;
    for (std::size_t s = 0; s < in.v.size(); ++s)
        if (in.p[s] > 0.0) M = std::max(M, in.v[s]);
    return M;
}

/// Compact copy of the states with positive nominal mass.
struct Support {
    std::vector<double> p;
    std::vector<double> v;

    explicit Support(const BackupInput& in) {
        for (std::size_t s = 0; s < in.p.size(); ++s)
            if (in.p[s] > 0.0) {
                p.push_back(in.p[s]);
                v.push_back(in.v[s]);
            }
    }
};

double expectation(std::span<const double> q, std::span<const double> v) {
    double e = 0.0;
    for (std::size_t s = 0; s < q.size(); ++s) e += q[s] * v[s];
    return e;
}

struct SearchResult {
    double x;
    double fx;
};

/// Golden-section minimization of a unimodal f on [a, b]. Returns the best
/// point evaluated; counts a cap hit if the bracket is still wider than the
/// tolerance after kSearchMaxIterations.
template <class F>
SearchResult golden_minimize(F&& f, double a, double b) {
    SearchResult best{a, f(a)};
    auto consider = [&](double x, double fx) {
        if (fx < best.fx) best = {x, fx};
    };
    consider(b, f(b));
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    consider(c, fc);
    consider(d, fd);
    int it = 0;
    while (b - a > kSearchTolerance && it < kSearchMaxIterations) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
            consider(d, fd);
        }
        ++it;
    }
    if (b - a > kSearchTolerance) g_cap_hits.fetch_add(1, std::memory_order_relaxed);
    return best;
}

/// Moves `amount` of mass onto `dest`, taking it from the highest-valued
/// states first (ties: higher index first).
std::vector<double> shift_mass_to(const BackupInput& in, int dest, double amount) {
    std::vector<double> q(in.p.begin(), in.p.end());
    if (amount <= 0.0) return q;
    std::vector<int> order(q.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return in.v[x] > in.v[y] || (in.v[x] == in.v[y] && x > y); });
    double left = amount;
    for (int s : order) {
        if (left <= 0.0) break;
        if (s == dest) continue;
        const double take = std::min(left, q[s]);
        q[s] -= take;
        q[dest] += take;
        left -= take;
    }
    return q;
}

std::vector<double> normalized(std::vector<double> q) {
    double z = 0.0;
    for (double x : q) z += x;
    if (z > 0.0)
        for (double& x : q) x /= z;
    return q;
}

/// p restricted to support states whose value ties the support minimum.
std::vector<double> mass_on_argmin(const BackupInput& in, double m) {
    std::vector<double> q(in.p.size(), 0.0);
    for (std::size_t s = 0; s < q.size(); ++s)
        if (in.p[s] > 0.0 && in.v[s] <= m + kTieTolerance) q[s] = in.p[s];
    return normalized(std::move(q));
}

// ---------------------------------------------------------------------------
// chi-square: clip-level search shared by both frameworks

struct ClipStats {
    double mean;
    double var;
};

ClipStats clipped_stats(const Support& sup, double alpha) {
    double mean = 0.0;
    for (std::size_t i = 0; i < sup.p.size(); ++i) mean += sup.p[i] * std::min(sup.v[i], alpha);
    double var = 0.0;
    for (std::size_t i = 0; i < sup.p.size(); ++i) {
        const double d = std::min(sup.v[i], alpha) - mean;
        var += sup.p[i] * d * d;
    }
    return {mean, var};
}

/// Maximizes E_p[min(v,alpha)] - penalty(Var_p(min(v,alpha))) over alpha in
/// [min v, max v] on the support of p. Between consecutive support values
/// the clipped vector is affine in alpha, so the objective is concave on
/// each segment; every segment gets its own golden-section search.
template <class Penalty>
SearchResult chi2_clip_search(const Support& sup, Penalty&& penalty) {
    std::vector<double> knots = sup.v;
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    auto neg_obj = [&](double alpha) {
        const ClipStats st = clipped_stats(sup, alpha);
        return -(st.mean - penalty(std::max(st.var, 0.0)));
    };
    SearchResult best{knots.front(), neg_obj(knots.front())};
    for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
        const SearchResult r = golden_minimize(neg_obj, knots[j], knots[j + 1]);
        if (r.fx < best.fx) best = r;
    }
    return {best.x, -best.fx};
}

/// Worst case of the chi-square problems from the stationarity condition
/// q(s) = p(s) (1 - (w(s) - E_p[w]) / (2 nu)), w = min(v, alpha).
std::vector<double> chi2_worst(const BackupInput& in, const Support& sup, double alpha,
                               double two_nu) {
    const ClipStats st = clipped_stats(sup, alpha);
    std::vector<double> q(in.p.size(), 0.0);
    for (std::size_t s = 0; s < q.size(); ++s) {
        if (in.p[s] <= 0.0) continue;
        const double w = std::min(in.v[s], alpha);
        q[s] = std::max(0.0, in.p[s] * (1.0 - (w - st.mean) / two_nu));
    }
    return normalized(std::move(q));
}

}  // namespace

// ---------------------------------------------------------------------------

BackupOutput tv_constrained(const BackupInput& in, double rho, bool want_dist, TvScope scope) {
    check_parameter(rho, "rho");
    check_input(in);
    const Extremum lo = min_over(in, scope == TvScope::NominalSupport);
    const double m = lo.value;

    // g(eta) = E_p[(eta - v)_+] + rho (eta - m)_+ - eta is convex and piecewise
    // linear with kinks at the support values and at m, so its minimum over
    // [0, vmax] sits at one of those points or an endpoint.
    const Support sup(in);
    std::vector<double> candidates{0.0, std::max(in.vmax, 0.0), m};
    candidates.insert(candidates.end(), sup.v.begin(), sup.v.end());
    auto g = [&](double eta) {
        double e = 0.0;
        for (std::size_t i = 0; i < sup.p.size(); ++i)
            if (eta > sup.v[i]) e += sup.p[i] * (eta - sup.v[i]);
        return e + rho * std::max(eta - m, 0.0) - eta;
    };
    double best_eta = 0.0;
    double best_g = kInf;
    for (double eta : candidates) {
        eta = std::clamp(eta, 0.0, std::max(in.vmax, 0.0));
        const double ge = g(eta);
        if (ge < best_g || (ge == best_g && eta < best_eta)) {
            best_g = ge;
            best_eta = eta;
        }
    }

    BackupOutput out;
    out.value = -best_g;
    out.dual_var = best_eta;
    if (want_dist) out.worst_dist = shift_mass_to(in, lo.index, std::min(rho, 1.0 - in.p[lo.index]));
    return out;
}

BackupOutput tv_constrained_fast(const BackupInput& in, double rho, TvScope scope) {
    check_parameter(rho, "rho");
    check_input(in);
    std::vector<int> states;
    for (std::size_t s = 0; s < in.p.size(); ++s)
        if (scope == TvScope::AllStates || in.p[s] > 0.0) states.push_back(int(s));

    BackupOutput out;
    if (states.size() == 1) {
        out.value = expectation(in.p, in.v);
        out.worst_dist = std::vector<double>(in.p.begin(), in.p.end());
        return out;
    }

    std::stable_sort(states.begin(), states.end(), [&](int x, int y) { return in.v[x] < in.v[y]; });
    const int n = int(states.size());
    std::vector<double> P(n);
    for (int i = 0; i < n; ++i) P[i] = in.p[states[i]];
    const double radius = std::min(rho, 1.0);

    // Raise the lowest-valued states up to `radius` in total (each capped at
    // 1), then drain the same total from the highest-valued states.
    double added = 0.0;
    for (int lo = 0; added < radius && lo < n; ++lo) {
        const double tmp = std::min(radius - added, 1.0 - P[lo]);
        P[lo] += tmp;
        added += tmp;
    }
    double removed = 0.0;
    for (int hi = n - 1; removed < radius && hi >= 0; --hi) {
        const double tmp = std::min(radius - removed, P[hi]);
        P[hi] -= tmp;
        removed += tmp;
    }

    std::vector<double> q(in.p.size(), 0.0);
    for (int i = 0; i < n; ++i) q[states[i]] = P[i];
    out.value = expectation(q, in.v);
    out.worst_dist = std::move(q);
    return out;
}

BackupOutput kl_constrained(const BackupInput& in, double rho, bool want_dist) {
    check_parameter(rho, "rho");
    check_input(in);
    const double m = min_over(in, true).value;
    const double M = support_max(in);

    BackupOutput out;
    if (M - m <= kTieTolerance) {
        out.value = m;
        out.dual_var = 0.0;
        if (want_dist) out.worst_dist = std::vector<double>(in.p.begin(), in.p.end());
        return out;
    }

    // f(nu) = nu ln E_p[exp(-v/nu)] + nu rho, shifted by m for stability.
    const Support sup(in);
    auto f = [&](double nu) {
        double z = 0.0;
        for (std::size_t i = 0; i < sup.p.size(); ++i) z += sup.p[i] * std::exp(-(sup.v[i] - m) / nu);
        return -m + nu * std::log(z) + nu * rho;
    };
    const double hi = std::max(std::max(in.vmax, M) / rho, 2.0 * kNuFloor);
    SearchResult r = golden_minimize(f, kNuFloor, hi);
    // nu -> 0+ limit is -min_{supp p} v.
    double nu = r.x;
    double fmin = r.fx;
    if (-m <= fmin) {
        nu = 0.0;
        fmin = -m;
    }

    out.value = -fmin;
    out.dual_var = nu;
    if (want_dist) {
        if (nu == 0.0) {
            out.worst_dist = mass_on_argmin(in, m);
        } else {
            std::vector<double> q(in.p.size(), 0.0);
            for (std::size_t s = 0; s < q.size(); ++s)
                if (in.p[s] > 0.0) q[s] = in.p[s] * std::exp(-(in.v[s] - m) / nu);
            out.worst_dist = normalized(std::move(q));
        }
    }
    return out;
}

BackupOutput chi2_constrained(const BackupInput& in, double rho, bool want_dist) {
    check_parameter(rho, "rho");
    check_input(in);
    const double m = min_over(in, true).value;
    const double M = support_max(in);

    BackupOutput out;
    if (M - m <= kTieTolerance) {
        out.value = m;
        out.dual_var = M;
        if (want_dist) out.worst_dist = std::vector<double>(in.p.begin(), in.p.end());
        return out;
    }

    const double sqrt_rho = std::sqrt(rho);
    const Support sup(in);
    const SearchResult r = chi2_clip_search(sup, [&](double var) { return sqrt_rho * std::sqrt(var); });
    out.value = r.fx;
    out.dual_var = r.x;
    if (want_dist) {
        const double sd = std::sqrt(std::max(clipped_stats(sup, r.x).var, 0.0));
        // nu* = sd / (2 sqrt(rho)); a degenerate sd means everything is clipped
        // to the minimum and the worst case sits on the argmin states.
        if (sd <= 1e-12)
            out.worst_dist = mass_on_argmin(in, m);
        else
            out.worst_dist = chi2_worst(in, sup, r.x, sd / sqrt_rho);
    }
    return out;
}

BackupOutput tv_regularized(const BackupInput& in, double beta, bool want_dist, TvScope scope) {
    check_parameter(beta, "beta");
    check_input(in);
    const Extremum lo = min_over(in, scope == TvScope::NominalSupport);
    const double level = lo.value + beta;

    BackupOutput out;
    // E_p[min(v, m + beta)] == (m + beta) - E_p[(m + beta - v)_+]
    double value = 0.0;
    for (std::size_t s = 0; s < in.p.size(); ++s) value += in.p[s] * std::min(in.v[s], level);
    out.value = value;
    out.dual_var = level;
    if (want_dist) {
        std::vector<double> q(in.p.begin(), in.p.end());
        for (std::size_t s = 0; s < q.size(); ++s)
            if (int(s) != lo.index && in.v[s] > level) {
                q[lo.index] += q[s];
                q[s] = 0.0;
            }
        out.worst_dist = std::move(q);
    }
    return out;
}

BackupOutput kl_regularized(const BackupInput& in, double beta, bool want_dist) {
    check_parameter(beta, "beta");
    check_input(in);
    const double m = min_over(in, true).value;
    std::vector<double> w(in.p.size(), 0.0);
    double z = 0.0;
    for (std::size_t s = 0; s < in.p.size(); ++s)
        if (in.p[s] > 0.0) {
            w[s] = in.p[s] * std::exp(-(in.v[s] - m) / beta);
            z += w[s];
        }
    BackupOutput out;
    out.value = m - beta * std::log(z);
    out.dual_var = beta;
    if (want_dist) out.worst_dist = normalized(std::move(w));
    return out;
}

BackupOutput chi2_regularized(const BackupInput& in, double beta, bool want_dist) {
    check_parameter(beta, "beta");
    check_input(in);
    const double m = min_over(in, true).value;
    const double M = support_max(in);

    BackupOutput out;
    if (M - m <= kTieTolerance) {
        out.value = m;
        out.dual_var = M;
        if (want_dist) out.worst_dist = std::vector<double>(in.p.begin(), in.p.end());
        return out;
    }
    const double scale = 1.0 / (4.0 * beta);
    const Support sup(in);
    const SearchResult r = chi2_clip_search(sup, [&](double var) { return scale * var; });
    out.value = r.fx;
    out.dual_var = r.x;
    if (want_dist) out.worst_dist = chi2_worst(in, sup, r.x, 2.0 * beta);
    return out;
}

BackupOutput backup(const BackupInput& in, const RobustSpec& spec, bool want_dist) {
    if (spec.framework == Framework::Constrained) {
        const double rho = spec.radius_rho;
        switch (spec.divergence) {
        case Divergence::TV: return tv_constrained(in, rho, want_dist, spec.tv_scope);
        case Divergence::KL: return kl_constrained(in, rho, want_dist);
        case Divergence::Chi2: return chi2_constrained(in, rho, want_dist);
        }
    } else {
        const double beta = spec.regularizer_beta;
        switch (spec.divergence) {
        case Divergence::TV: return tv_regularized(in, beta, want_dist, spec.tv_scope);
        case Divergence::KL: return kl_regularized(in, beta, want_dist);
        case Divergence::Chi2: return chi2_regularized(in, beta, want_dist);
        }
    }
    throw std::invalid_argument("backup: unknown robust spec");
}

// ---------------------------------------------------------------------------

double divergence(Divergence d, std::span<const double> q, std::span<const double> p) {
    double acc = 0.0;
    switch (d) {
    case Divergence::TV:
        for (std::size_t s = 0; s < q.size(); ++s) acc += std::abs(q[s] - p[s]);
        return 0.5 * acc;
    case Divergence::KL:
        for (std::size_t s = 0; s < q.size(); ++s) {
            if (q[s] <= 0.0) continue;
            if (p[s] <= 0.0) return kInf;
            acc += q[s] * std::log(q[s] / p[s]);
        }
        return std::max(acc, 0.0);
    case Divergence::Chi2:
        for (std::size_t s = 0; s < q.size(); ++s) {
            if (p[s] <= 0.0) {
                if (q[s] > 0.0) return kInf;
                continue;
            }
            const double diff = q[s] - p[s];
            acc += diff * diff / p[s];
        }
        return acc;
    }
    return kInf;
}

double primal_objective(const BackupInput& in, const RobustSpec& spec, std::span<const double> q,
                        double feasibility_tol) {
    if (spec.divergence == Divergence::TV && spec.tv_scope == TvScope::NominalSupport)
        for (std::size_t s = 0; s < q.size(); ++s)
            if (q[s] > 0.0 && in.p[s] <= 0.0) return kInf;
    const double e = expectation(q, in.v);
    const double D = divergence(spec.divergence, q, in.p);
    if (spec.framework == Framework::Constrained)
        return D <= spec.radius_rho + feasibility_tol ? e : kInf;
    return e + spec.regularizer_beta * D;
}

std::uint64_t iteration_cap_hits() { return g_cap_hits.load(std::memory_order_relaxed); }
void reset_iteration_cap_hits() { g_cap_hits.store(0, std::memory_order_relaxed); }

}  // namespace orbit::dual
