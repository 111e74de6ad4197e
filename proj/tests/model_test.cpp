#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "orbit/model.hpp"
#include "support.hpp"

using namespace orbit;

namespace {

TabularMDP one_cell(double p, double r) {
    TabularMDP m(1, 1, 1);
    m.row(0, 0, 0)[0] = p;
    m.reward(0, 0, 0) = r;
    return m;
}

Trajectory random_trajectory(std::mt19937_64& rng, Dims d) {
    std::uniform_int_distribution<int> s(0, d.S - 1), a(0, d.A - 1);
    std::uniform_real_distribution<double> r(0.0, 1.0);
    Trajectory t;
    for (int h = 0; h < d.H; ++h) t.steps.push_back({s(rng), a(rng), r(rng)});
    t.final_state = s(rng);
    return t;
}

}  // namespace

TEST(ValidateMdp, MinimalModelIsValid) { EXPECT_TRUE(validate_mdp(one_cell(1.0, 0.5)).empty()); }

TEST(ValidateMdp, ReportsRowSum) {
    const auto v = validate_mdp(one_cell(0.9, 0.5));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].message(), "row sum != 1 at (1,0,0)");
}

TEST(ValidateMdp, ReportsRewardRange) {
    const auto v = validate_mdp(one_cell(1.0, 1.5));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].message(), "reward out of [0,1] at (1,0,0)");
}

TEST(ValidateMdp, ReportsNegativeEntriesAndInitialState) {
    TabularMDP m(2, 1, 1);
    m.row(0, 0, 0)[0] = 1.5;
    m.row(0, 0, 0)[1] = -0.5;
    m.row(0, 1, 0)[1] = 1.0;
    m.initial_state = 3;
    const auto v = validate_mdp(m);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0].what, "initial state out of range");
    EXPECT_EQ(v[1].what, "negative probability");
}

TEST(MdpJson, RoundTrip) {
    std::mt19937_64 rng(1);
    TabularMDP m = test_support::random_mdp(rng, 3, 2, 4);
    m.initial_state = 2;
    const TabularMDP back = mdp_from_json_text(mdp_to_json_text(m));
    EXPECT_EQ(back, m);
}

TEST(MdpJson, UsesDocumentedFieldNames) {
    const std::string text = mdp_to_json_text(one_cell(1.0, 0.25));
    for (const char* key : {"\"S\"", "\"A\"", "\"H\"", "\"P\"", "\"r\"", "\"initial_state\""})
        EXPECT_NE(text.find(key), std::string::npos) << key;
}

TEST(MdpJson, RejectsMalformedInput) {
    EXPECT_THROW(mdp_from_json_text("{"), std::invalid_argument);
    EXPECT_THROW(mdp_from_json_text(R"({"S":1,"A":1,"H":1,"P":[[[[1]]]],"r":[[[0]]]})"), std::invalid_argument);
    EXPECT_THROW(mdp_from_json_text(R"({"S":2,"A":1,"H":1,"P":[[[[1]],[[1]]]],"r":[[[0],[0]]],"initial_state":0})"),
                 std::invalid_argument);
}

TEST(RobustSpec, ValidatesActiveParameter) {
    EXPECT_NO_THROW(RobustSpec::constrained(Divergence::TV, 0.1).validate());
    EXPECT_THROW(RobustSpec::constrained(Divergence::TV, 0.0).validate(), std::invalid_argument);
    EXPECT_THROW(RobustSpec::regularized(Divergence::KL, -1.0).validate(), std::invalid_argument);
    RobustSpec both = RobustSpec::constrained(Divergence::KL, 0.1);
    both.regularizer_beta = 1.0;
    EXPECT_THROW(both.validate(), std::invalid_argument);
    EXPECT_EQ(RobustSpec::regularized(Divergence::Chi2, 1.0).label(), "RRMDP-Chi2");
    EXPECT_DOUBLE_EQ(RobustSpec::regularized(Divergence::Chi2, 0.7).parameter(), 0.7);
}

TEST(RobustSpec, ParsesNames) {
    EXPECT_EQ(parse_framework("Constrained"), Framework::Constrained);
    EXPECT_EQ(parse_divergence("chi2"), Divergence::Chi2);
    EXPECT_EQ(parse_tv_scope("support"), TvScope::NominalSupport);
    EXPECT_THROW(parse_divergence("hellinger"), std::invalid_argument);
}

TEST(EmpiricalUpdate, SingleSample) {
    EmpiricalModel em(Dims{2, 1, 2});
    Trajectory t;
    t.steps = {{0, 0, 1.0}, {1, 0, 0.0}};
    t.final_state = 0;
    em = empirical_update(em, t);
    EXPECT_EQ(em.count(0, 0, 0), 1u);
    EXPECT_DOUBLE_EQ(em.r_hat(0, 0, 0), 1.0);
    EXPECT_EQ(std::vector<double>(em.p_hat(0, 0, 0).begin(), em.p_hat(0, 0, 0).end()), (std::vector<double>{0.0, 1.0}));
    // the last step's next state is the trajectory's final state
    EXPECT_EQ(std::vector<double>(em.p_hat(1, 1, 0).begin(), em.p_hat(1, 1, 0).end()), (std::vector<double>{1.0, 0.0}));
}

TEST(EmpiricalUpdate, TwoSampleMean) {
    EmpiricalModel em(Dims{2, 1, 1});
    em.update({{{0, 0, 1.0}}, 1});
    em.update({{{0, 0, 0.0}}, 0});
    EXPECT_DOUBLE_EQ(em.r_hat(0, 0, 0), 0.5);
    EXPECT_DOUBLE_EQ(em.p_hat(0, 0, 0)[0], 0.5);
}

TEST(EmpiricalUpdate, UnvisitedCellsStayZero) {
    EmpiricalModel em(Dims{3, 2, 2});
    em.update({{{0, 0, 0.5}, {1, 1, 0.5}}, 2});
    EXPECT_EQ(em.count(0, 1, 1), 0u);
    EXPECT_EQ(em.r_hat(0, 1, 1), 0.0);
    for (double x : em.p_hat(0, 1, 1)) EXPECT_EQ(x, 0.0);
}

TEST(EmpiricalUpdate, RejectsOutOfRangeAndLeavesModelUntouched) {
    EmpiricalModel em(Dims{2, 2, 2});
    em.update({{{0, 0, 0.5}, {1, 1, 0.5}}, 0});
    const EmpiricalModel before = em;
    EXPECT_THROW(em.update({{{0, 0, 0.5}, {1, 2, 0.5}}, 0}), std::out_of_range);
    EXPECT_THROW(em.update({{{0, 0, 0.5}, {1, 1, 0.5}}, 5}), std::out_of_range);
    EXPECT_THROW(em.update({{{0, 0, 0.5}}, 0}), std::out_of_range);
    EXPECT_EQ(em, before);
}

TEST(EmpiricalUpdate, MatchesBatchRecomputation) {
    const Dims d{4, 3, 3};
    std::mt19937_64 rng(7);
    std::vector<Trajectory> trajs;
    for (int i = 0; i < 100; ++i) trajs.push_back(random_trajectory(rng, d));

    EmpiricalModel em(d);
    for (const auto& t : trajs) em.update(t);

    std::vector<double> n(d.cells(), 0.0), rsum(d.cells(), 0.0), psum(d.cells() * d.S, 0.0);
    for (const auto& t : trajs)
        for (int h = 0; h < d.H; ++h) {
            const Step& st = t.steps[h];
            const int next = h + 1 < d.H ? t.steps[h + 1].state : t.final_state;
            const std::size_t c = em.cell(h, st.state, st.action);
            n[c] += 1;
            rsum[c] += st.reward;
            psum[c * d.S + next] += 1;
        }
    for (int h = 0; h < d.H; ++h) {
        std::uint64_t total = 0;
        for (int s = 0; s < d.S; ++s)
            for (int a = 0; a < d.A; ++a) {
                const std::size_t c = em.cell(h, s, a);
                total += em.count(h, s, a);
                ASSERT_EQ(double(em.count(h, s, a)), n[c]);
                if (n[c] == 0) continue;
                EXPECT_NEAR(em.r_hat(h, s, a), rsum[c] / n[c], 1e-12);
                for (int s2 = 0; s2 < d.S; ++s2) EXPECT_NEAR(em.p_hat(h, s, a)[s2], psum[c * d.S + s2] / n[c], 1e-12);
                double sum = 0.0;
                for (double x : em.p_hat(h, s, a)) sum += x;
                EXPECT_NEAR(sum, 1.0, 1e-12);
            }
        EXPECT_EQ(total, trajs.size());
    }
}

TEST(EmpiricalUpdate, PermutationInvariant) {
    const Dims d{3, 2, 4};
    std::mt19937_64 rng(11);
    std::vector<Trajectory> trajs;
    for (int i = 0; i < 60; ++i) trajs.push_back(random_trajectory(rng, d));
    EmpiricalModel a(d), b(d);
    for (const auto& t : trajs) a.update(t);
    std::shuffle(trajs.begin(), trajs.end(), rng);
    for (const auto& t : trajs) b.update(t);
    for (int h = 0; h < d.H; ++h)
        for (int s = 0; s < d.S; ++s)
            for (int x = 0; x < d.A; ++x) {
                ASSERT_EQ(a.count(h, s, x), b.count(h, s, x));
                EXPECT_NEAR(a.r_hat(h, s, x), b.r_hat(h, s, x), 1e-12);
                for (int s2 = 0; s2 < d.S; ++s2) EXPECT_NEAR(a.p_hat(h, s, x)[s2], b.p_hat(h, s, x)[s2], 1e-12);
            }
}

TEST(ValueTables, TerminalRowIsZero) {
    ValueTables vt(Dims{3, 2, 4});
    EXPECT_EQ(vt.V.size(), 5u * 3u);
    for (double x : vt.v_row(4)) EXPECT_EQ(x, 0.0);
}
