#pragma once

#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "orbit/model.hpp"

namespace orbit {

struct Transition {
    int next_state = 0;
    double reward = 0.0;
};

/// Episodic environment. Implementations hold no mutable state; all
/// randomness comes from the caller's generator, so one generator per
/// thread makes concurrent use safe.
class Simulator {
public:
    virtual ~Simulator() = default;

    virtual Dims dims() const = 0;
    virtual int reset(std::mt19937_64& rng) const = 0;
    /// Samples the outcome of action a in state s at 0-based step h.
    virtual Transition step(int h, int s, int a, std::mt19937_64& rng) const = 0;
    /// Exact model of the dynamics, when one exists.
    virtual const TabularMDP* model() const { return nullptr; }
};

/// Inverse-CDF draw of an index from a probability vector.
int sample_index(std::span<const double> probs, std::mt19937_64& rng);

/// Samples directly from a TabularMDP; rewards are the stored means.
class TabularSimulator final : public Simulator {
public:
    explicit TabularSimulator(TabularMDP mdp);

    Dims dims() const override { return mdp_.dims(); }
    int reset(std::mt19937_64&) const override { return mdp_.initial_state; }
    Transition step(int h, int s, int a, std::mt19937_64& rng) const override;
    const TabularMDP* model() const override { return &mdp_; }

private:
    TabularMDP mdp_;
};

struct EnvInstance {
    TabularMDP mdp;
    std::shared_ptr<const Simulator> sim;
};

/// Pointwise mixture (1 - t) * a + t * b of two models with equal
/// dimensions; rewards and initial state come from a.
TabularMDP mix_models(const TabularMDP& a, const TabularMDP& b, double t);

// ---------------------------------------------------------------------------
// Six-state, ten-action, three-step chain whose worst case under a TV ball of
// radius 1/3 shifts visitation towards a rarely visited branch.
//
//   h=0: s0 -> s1 (beta) | s2 (1 - beta)           for every action
//   h=1: s1, a=0  -> s3 (5/6) | s4 (1/6)
//        s1, a>=1 -> s3 (1/2) | s4 (1/2)
//        s2 -> s5
//   h=2: reward 1 in s3, 1/2 in s5
// Rows not listed are self-loops.

struct VisitRatioEnv {
    double beta = 0.0;
    /// Supremal visitation ratio under the TV ball of radius 1/3: 3 + 1/beta.
    double c_vr = 0.0;
    TabularMDP nominal;
    /// Worst-case model under radius 1/3: s0 -> s1 with beta + 1/3, and
    /// s1 -> s3 with 1/2 (a=0) or 1/6 (a>=1).
    TabularMDP worst_case;
    std::shared_ptr<const Simulator> sim;  // samples the nominal model
};

inline constexpr int kVisitRatioStates = 6;
inline constexpr int kVisitRatioActions = 10;
inline constexpr int kVisitRatioHorizon = 3;
inline constexpr double kVisitRatioRadius = 1.0 / 3.0;

/// Throws std::invalid_argument unless 0 < beta < 2/3.
VisitRatioEnv build_visit_ratio_env(double beta);

/// Nominal model moved a fraction t in [0,1] of the way to the worst case.
TabularMDP visit_ratio_target(const VisitRatioEnv& env, double t);

// ---------------------------------------------------------------------------
// Five-state, five-action, three-step chain. From s0 action a reaches
// s1 w.p. 0.4 + a/10, s3 w.p. 0.1 + q(0.5 - a/10), s4 w.p. (1 - q)(0.5 - a/10);
// s1 -> s2 (a/10) | s3; s2 -> s3 | s4 (a/10); s3, s4 absorbing. Reward a/20
// in s0..s2, 1 in s4, 0 in s3. q = 0 is the training environment.

/// Throws std::invalid_argument unless 0 <= q <= 1.
EnvInstance build_simple_rmdp(double q);

// ---------------------------------------------------------------------------
// Frozen Lake.

struct GridMap {
    std::vector<std::string> rows;  // characters S, F, H, G only

    int height() const { return int(rows.size()); }
    int width() const { return rows.empty() ? 0 : int(rows.front().size()); }
    int cell(int r, int c) const { return r * width() + c; }
    char at(int cell) const { return rows[cell / width()][cell % width()]; }
    int start() const;
};

class MapParseError : public std::invalid_argument {
public:
    MapParseError(const std::string& what, int line, int column)
        : std::invalid_argument(what), line_(line), column_(column) {}

    /// 0-based position of the offending cell; -1 when not tied to a cell.
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// One row per line; spaces between cells and blank lines are ignored.
/// Requires equal-length rows, exactly one S and at least one G.
GridMap parse_map(std::string_view text);

/// The 8x8 layout used by Gym's FrozenLake-v1.
GridMap default_frozen_lake_map();

/// Gym action order.
enum class LakeAction { Left = 0, Down = 1, Right = 2, Up = 3 };

inline constexpr int kLakeActions = 4;
inline int opposite(int a) { return (a + 2) % 4; }

/// The intended direction is first replaced by its opposite w.p. p_perturb;
/// the agent then moves in that direction w.p. 1 - p_slip and in each
/// perpendicular direction w.p. p_slip / 2. Moves off the grid stay put;
/// goals and holes are absorbing. The reward is 1 at the last step
/// (0-based h = H-1) when the agent is on a goal, 0 otherwise.
///
/// The returned model is the exact law of the returned simulator, which
/// draws moves procedurally rather than from the table.
EnvInstance build_frozen_lake(const GridMap& map, int H, double p_slip, double p_perturb);

}  // namespace orbit
