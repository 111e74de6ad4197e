#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Core value types for finite-horizon tabular robust MDPs.
//
// Steps are 0-based throughout the API (h = 0 .. H-1). Human-readable
// messages print 1-based steps to match the usual h in [H] notation.

namespace orbit {

struct Dims {
    int S = 0;
    int A = 0;
    int H = 0;

    std::size_t cells() const { return std::size_t(H) * S * A; }
    bool operator==(const Dims&) const = default;
};

/// Finite-horizon nominal model: P[h][s][a] is a distribution over next
/// states, r[h][s][a] the mean reward in [0,1].
class TabularMDP {
public:
    TabularMDP() = default;
    /// Zero-filled model; callers populate P and r.
    TabularMDP(int S, int A, int H);

    Dims dims() const { return dims_; }
    int S() const { return dims_.S; }
    int A() const { return dims_.A; }
    int H() const { return dims_.H; }

    std::span<double> row(int h, int s, int a) {
        return {P_.data() + row_offset(h, s, a), std::size_t(dims_.S)};
    }
    std::span<const double> row(int h, int s, int a) const {
        return {P_.data() + row_offset(h, s, a), std::size_t(dims_.S)};
    }
    double& reward(int h, int s, int a) { return r_[cell(h, s, a)]; }
    double reward(int h, int s, int a) const { return r_[cell(h, s, a)]; }

    std::size_t cell(int h, int s, int a) const {
        return (std::size_t(h) * dims_.S + s) * dims_.A + a;
    }

    int initial_state = 0;

    /// Smallest strictly positive transition probability in the model.
    double min_positive_probability() const;

    bool operator==(const TabularMDP&) const = default;

private:
    std::size_t row_offset(int h, int s, int a) const { return cell(h, s, a) * dims_.S; }

    Dims dims_;
    std::vector<double> P_;
    std::vector<double> r_;
};

struct Violation {
    int h = 0;  // 0-based
    int s = 0;
    int a = 0;
    std::string what;

    /// e.g. "row sum != 1 at (1,0,0)" with a 1-based step.
    std::string message() const;
};

/// Checks every TabularMDP invariant; empty result iff the model is valid.
std::vector<Violation> validate_mdp(const TabularMDP& mdp);

/// JSON text with fields "S","A","H","P","r","initial_state"; P is nested
/// [h][s][a][s'] and r is nested [h][s][a]. Parsing validates shapes and
/// throws std::invalid_argument on malformed input.
std::string mdp_to_json_text(const TabularMDP& mdp);
TabularMDP mdp_from_json_text(const std::string& text);

// ---------------------------------------------------------------------------

enum class Framework { Constrained, Regularized };
enum class Divergence { TV, KL, Chi2 };

/// Which states the TV worst case may move mass onto. AllStates takes the
/// minimum over the whole state space; NominalSupport restricts the
/// perturbation to next states that have nominal mass.
enum class TvScope { AllStates, NominalSupport };

struct RobustSpec {
    Framework framework = Framework::Constrained;
    Divergence divergence = Divergence::TV;
    double radius_rho = 0.0;        // used iff Constrained
    double regularizer_beta = 0.0;  // used iff Regularized
    TvScope tv_scope = TvScope::AllStates;

    static RobustSpec constrained(Divergence d, double rho, TvScope scope = TvScope::AllStates);
    static RobustSpec regularized(Divergence d, double beta, TvScope scope = TvScope::AllStates);

    /// rho for constrained specs, beta for regularized ones.
    double parameter() const {
        return framework == Framework::Constrained ? radius_rho : regularizer_beta;
    }

    /// Throws std::invalid_argument when the active parameter is not > 0 or
    /// the inactive one is set.
    void validate() const;

    /// Short label such as "CRMDP-TV" or "RRMDP-Chi2".
    std::string label() const;

    bool operator==(const RobustSpec&) const = default;
};

std::string to_string(Framework f);
std::string to_string(Divergence d);
std::string to_string(TvScope s);
Framework parse_framework(const std::string& text);
Divergence parse_divergence(const std::string& text);
TvScope parse_tv_scope(const std::string& text);

// ---------------------------------------------------------------------------

struct Step {
    int state = 0;
    int action = 0;
    double reward = 0.0;
    bool operator==(const Step&) const = default;
};

/// One episode: H (state, action, reward) triples plus the state reached
/// after the last action.
struct Trajectory {
    std::vector<Step> steps;
    int final_state = 0;
    bool operator==(const Trajectory&) const = default;
};

/// Running empirical model built from observed trajectories. Cells with
/// n = 0 keep r_hat = 0 and an all-zero P_hat row.
class EmpiricalModel {
public:
    EmpiricalModel() = default;
    explicit EmpiricalModel(Dims dims);

    Dims dims() const { return dims_; }

    std::uint64_t count(int h, int s, int a) const { return n_[cell(h, s, a)]; }
    double r_hat(int h, int s, int a) const { return r_hat_[cell(h, s, a)]; }
    std::span<const double> p_hat(int h, int s, int a) const {
        return {P_hat_.data() + cell(h, s, a) * dims_.S, std::size_t(dims_.S)};
    }

    /// Folds one trajectory into the running means. Throws std::out_of_range
    /// (leaving the model untouched) if an index or reward is out of range.
    void update(const Trajectory& tau);

    std::size_t cell(int h, int s, int a) const {
        return (std::size_t(h) * dims_.S + s) * dims_.A + a;
    }

    bool operator==(const EmpiricalModel&) const = default;

private:
    Dims dims_;
    std::vector<std::uint64_t> n_;
    std::vector<double> r_hat_;
    std::vector<double> P_hat_;
};

/// Functional form of EmpiricalModel::update.
EmpiricalModel empirical_update(EmpiricalModel em, const Trajectory& tau);

// ---------------------------------------------------------------------------

/// Deterministic time-dependent policy, action[h][s].
class Policy {
public:
    Policy() = default;
    Policy(int S, int H, int fill = 0) : S_(S), H_(H), action_(std::size_t(S) * H, fill) {}

    int operator()(int h, int s) const { return action_[std::size_t(h) * S_ + s]; }
    int& at(int h, int s) { return action_[std::size_t(h) * S_ + s]; }

    int S() const { return S_; }
    int H() const { return H_; }

    bool operator==(const Policy&) const = default;

private:
    int S_ = 0;
    int H_ = 0;
    std::vector<int> action_;
};

/// V has H+1 rows (V[H] = 0); Q has H rows of S x A.
struct ValueTables {
    ValueTables() = default;
    explicit ValueTables(Dims d)
        : dims(d), V(std::size_t(d.H + 1) * d.S, 0.0), Q(d.cells(), 0.0) {}

    double& v(int h, int s) { return V[std::size_t(h) * dims.S + s]; }
    double v(int h, int s) const { return V[std::size_t(h) * dims.S + s]; }
    std::span<const double> v_row(int h) const {
        return {V.data() + std::size_t(h) * dims.S, std::size_t(dims.S)};
    }
    double& q(int h, int s, int a) { return Q[(std::size_t(h) * dims.S + s) * dims.A + a]; }
    double q(int h, int s, int a) const { return Q[(std::size_t(h) * dims.S + s) * dims.A + a]; }

    Dims dims;
    std::vector<double> V;
    std::vector<double> Q;

    bool operator==(const ValueTables&) const = default;
};

}  // namespace orbit
