#include "orbit/dual_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace orbit::dual {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFullGridBudget = 2e5;
constexpr int kCoarseDivisions = 20;
constexpr int kLocalRadius = 2;

/// Primal objective on the coordinates in `coords`; q is zero elsewhere.
class Primal {
public:
    Primal(const BackupInput& in, const RobustSpec& spec) : in_(in), spec_(spec) {
        const bool support_only = spec.divergence != Divergence::TV ||
                                  spec.tv_scope == TvScope::NominalSupport;
        for (std::size_t s = 0; s < in.p.size(); ++s)
            if (!support_only || in.p[s] > 0.0) coords.push_back(int(s));
        for (std::size_t s = 0; s < in.p.size(); ++s)
            if (std::find(coords.begin(), coords.end(), int(s)) == coords.end()) outside_mass_ += in.p[s];
    }

    double operator()(const std::vector<double>& x) const {
        const double e = expectation(x);
        const double d = distance(x);
        if (spec_.framework == Framework::Constrained) return d <= spec_.radius_rho ? e : kInf;
        return e + spec_.regularizer_beta * d;
    }

    /// Like operator(), but a constrained candidate outside the ball is
    /// replaced by the best ball point on the chords from the feasible
    /// anchors (p, p restricted to the zero pattern of x, and `center` if
    /// given) towards x; x is overwritten with that point. Skips the work
    /// when it cannot beat `incumbent`, since E is linear along a chord.
    double project(std::vector<double>& x, double incumbent,
                   const std::vector<double>* center = nullptr) const {
        if (spec_.framework == Framework::Regularized) return (*this)(x);
        const double ex = expectation(x);
        if (distance(x) <= spec_.radius_rho) return ex;
        if (ex >= incumbent) return kInf;

        const std::size_t d = x.size();
        std::vector<double> nominal(d), face(d, 0.0);
        double face_mass = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            nominal[i] = in_.p[coords[i]];
            if (x[i] > 0.0) face_mass += (face[i] = nominal[i]);
        }
        const std::vector<double>* anchors[3] = {&nominal, nullptr, center};
        if (face_mass > 0.0 && face_mass < 1.0) {
            for (double& f : face) f /= face_mass;
            if (distance(face) <= spec_.radius_rho) anchors[1] = &face;
        }

        std::vector<double> y(d), best_point;
        double best = kInf;
        for (const std::vector<double>* a : anchors) {
            if (!a) continue;
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 45; ++it) {
                const double mid = 0.5 * (lo + hi);
                for (std::size_t i = 0; i < d; ++i) y[i] = (*a)[i] + mid * (x[i] - (*a)[i]);
                (distance(y) <= spec_.radius_rho ? lo : hi) = mid;
            }
            for (std::size_t i = 0; i < d; ++i) y[i] = (*a)[i] + lo * (x[i] - (*a)[i]);
            const double fy = (*this)(y);
            if (fy < best) {
                best = fy;
                best_point = y;
            }
        }
        if (best < kInf) x = std::move(best_point);
        return best;
    }

    std::vector<int> coords;

private:
    double expectation(const std::vector<double>& x) const {
        double e = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) e += x[i] * in_.v[coords[i]];
        return e;
    }

    double distance(const std::vector<double>& x) const {
        double acc = 0.0;
        switch (spec_.divergence) {
        case Divergence::TV:
            for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - in_.p[coords[i]]);
            return 0.5 * (acc + outside_mass_);
        case Divergence::KL:
            for (std::size_t i = 0; i < x.size(); ++i)
                if (x[i] > 0.0) acc += x[i] * std::log(x[i] / in_.p[coords[i]]);
            return acc;
        case Divergence::Chi2:
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double diff = x[i] - in_.p[coords[i]];
                acc += diff * diff / in_.p[coords[i]];
            }
            return acc;
        }
        return kInf;
    }

    const BackupInput& in_;
    const RobustSpec& spec_;
    double outside_mass_ = 0.0;
};

struct Best {
    std::vector<double> x;
    double f = kInf;
};

double grid_size(int n, int d) {
    // C(n + d - 1, d - 1)
    double c = 1.0;
    for (int i = 1; i < d; ++i) c = c * (n + i) / i;
    return c;
}

/// Every point of the simplex grid with n divisions.
void enumerate_grid(const Primal& f, int n, Best& best) {
    const int d = int(f.coords.size());
    std::vector<int> k(d, 0);
    std::vector<double> x(d);
    // Recursive composition enumeration of n into d parts.
    auto rec = [&](auto&& self, int i, int left) -> void {
        if (i == d - 1) {
            k[i] = left;
            for (int j = 0; j < d; ++j) x[j] = double(k[j]) / n;
            const double fx = f.project(x, best.f);
            if (fx < best.f) best = {x, fx};
            return;
        }
        for (int c = 0; c <= left; ++c) {
            k[i] = c;
            self(self, i + 1, left - c);
        }
    };
    rec(rec, 0, n);
}

/// Repeated best-improvement search over the box of offsets
/// {-R..R}^(d-1) * step around the incumbent; the last coordinate absorbs
/// the balance. The step halves whenever the box holds no improvement.
void refine(const Primal& f, Best& best, double step, double final_step) {
    const int d = int(best.x.size());
    if (d < 2 || !std::isfinite(best.f)) return;
    const int width = 2 * kLocalRadius + 1;
    int offsets = 1;
    for (int i = 0; i < d - 1; ++i) offsets *= width;

    std::vector<double> x(d);
    while (step >= final_step) {
        bool improved = true;
        for (int guard = 0; improved && guard < 10000; ++guard) {
            improved = false;
            Best round = best;
            for (int code = 0; code < offsets; ++code) {
                int c = code;
                double partial = 0.0;
                bool ok = true;
                for (int i = 0; i < d - 1; ++i) {
                    const int off = c % width - kLocalRadius;
                    c /= width;
                    x[i] = best.x[i] + off * step;
                    if (x[i] < 0.0) {
                        if (x[i] > -1e-15) {
                            x[i] = 0.0;
                        } else {
                            ok = false;
                            break;
                        }
                    }
                    partial += x[i];
                }
                if (!ok) continue;
                x[d - 1] = 1.0 - partial;
                if (x[d - 1] < 0.0) {
                    if (x[d - 1] < -1e-15) continue;
                    x[d - 1] = 0.0;
                }
                const double fx = f.project(x, round.f, &best.x);
                if (fx < round.f - 1e-15) round = {x, fx};
            }
            if (round.f < best.f) {
                best = std::move(round);
                improved = true;
            }
        }
        step *= 0.5;
    }
}

}  // namespace

double oracle(const BackupInput& in, const RobustSpec& spec, double resolution) {
    if (in.p.size() > std::size_t(kOracleMaxStates))
        throw std::invalid_argument("oracle: at most " + std::to_string(kOracleMaxStates) +
                                    " states supported");
    if (in.p.size() != in.v.size() || in.p.empty())
        throw std::invalid_argument("oracle: p and v must be non-empty and of equal length");
    if (!(resolution > 0.0 && resolution <= 0.5))
        throw std::invalid_argument("oracle: resolution must be in (0, 0.5]");

    const Primal f(in, spec);
    const int d = int(f.coords.size());
    if (d == 0) throw std::invalid_argument("oracle: nominal row has zero mass");

    Best from_p;
    from_p.x.resize(d);
    for (int i = 0; i < d; ++i) from_p.x[i] = in.p[f.coords[i]];
    from_p.f = f(from_p.x);
    if (d == 1) return from_p.f;

    const int fine = int(std::lround(1.0 / resolution));
    const double final_step = resolution / 32.0;
    Best from_grid;
    double step;
    if (grid_size(fine, d) <= kFullGridBudget) {
        enumerate_grid(f, fine, from_grid);
        step = 0.5 / fine;
    } else {
        enumerate_grid(f, kCoarseDivisions, from_grid);
        step = 0.5 / kCoarseDivisions;
    }
    refine(f, from_grid, step, final_step);
    refine(f, from_p, step, final_step);
    return std::min(from_grid.f, from_p.f);
}

// ---------------------------------------------------------------------------

RandomBackup random_backup(std::mt19937_64& rng, int S, double vmax) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RandomBackup out;
    out.vmax = vmax;
    out.p.resize(S);
    out.v.resize(S);
    double mass = 0.0;
    for (int s = 0; s < S; ++s) {
        out.p[s] = unit(rng) < 0.2 ? 0.0 : -std::log(1.0 - unit(rng));
        mass += out.p[s];
    }
    if (mass == 0.0) {
        const int s = int(unit(rng) * S) % S;
        out.p[s] = 1.0;
        mass = 1.0;
    }
    for (double& x : out.p) x /= mass;
    for (double& x : out.v) x = vmax * unit(rng);
    return out;
}

bool DualsCheckReport::passed() const {
    for (const SettingGap& g : settings)
        if (g.failures > 0) return false;
    return true;
}

DualsCheckReport duals_check(int samples, std::uint64_t seed, double tolerance,
                             const BackupSolver& solver) {
    const BackupSolver solve =
        solver ? solver : [](const BackupInput& in, const RobustSpec& spec) { return backup(in, spec); };
    const double radii[] = {0.1, 0.3, 1.0};
    const double betas[] = {0.1, 0.5, 2.0};
    const Divergence divs[] = {Divergence::TV, Divergence::KL, Divergence::Chi2};

    DualsCheckReport report;
    report.samples = samples;
    report.tolerance = tolerance;
    std::mt19937_64 rng(seed);
    for (Framework fw : {Framework::Constrained, Framework::Regularized})
        for (Divergence dv : divs) {
            SettingGap gap;
            for (int i = 0; i < samples; ++i) {
                const RobustSpec spec = fw == Framework::Constrained
                                            ? RobustSpec::constrained(dv, radii[i % 3])
                                            : RobustSpec::regularized(dv, betas[i % 3]);
                gap.label = spec.label();
                const RandomBackup inst = random_backup(rng, 2 + i % 4);
                const double g = std::abs(solve(inst.input(), spec).value - oracle(inst.input(), spec));
                gap.worst_gap = std::max(gap.worst_gap, std::isnan(g) ? kInf : g);
                if (!(g <= tolerance)) ++gap.failures;
            }
            if (gap.label.empty())
                gap.label = (fw == Framework::Constrained ? RobustSpec::constrained(dv, 1.0)
                                                          : RobustSpec::regularized(dv, 1.0))
                                .label();
            report.settings.push_back(gap);
        }
    return report;
}

}  // namespace orbit::dual
