#include "resetinv/bids.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace resetinv;

namespace {

ProblemSpec zero_cost() {
    return ProblemSpec::retail(0, 0, 0, 0, 0, 0, DemandModel::exponential(1.0), 4.0, 3, 0.9);
}

ProblemSpec retail_exp(double gamma) {
    return ProblemSpec::retail(1.0, 0.0, 0.5, 0.0, 4.0, 1.0, DemandModel::exponential(1.0), 6.0, 7, gamma);
}

ProblemSpec water_reference() {
    std::vector<double> q;
    for (int t = 0; t < 7; ++t) q.push_back(1.0 + 0.3 * t);
    return ProblemSpec::water(1.0, 0.5, 5.0, q, DemandModel::truncated_normal(2.0, 1.0), 6.0, 7, 0.9);
}

}  // namespace

TEST(InitialUpperBound, ZeroCostProblem) { EXPECT_EQ(initial_upper_bound(zero_cost()), 0.0); }

TEST(InitialUpperBound, WithoutDiscountIsTheOneShotOptimum) {
    const auto spec = retail_exp(0.0);
    const BellmanOperator op(spec);
    EXPECT_NEAR(initial_upper_bound(op), op.reset_state_value(op.sweep(123.0)).value, 1e-12);
}

TEST(InitialUpperBound, BoundsTheFixedPoint) {
    const auto spec = retail_exp(0.9);
    const double bound = initial_upper_bound(spec);
    const Solution s = solve(spec);
    EXPECT_TRUE(std::isfinite(bound));
    EXPECT_GE(bound, s.v_star);
    EXPECT_EQ(s.upper_bound, bound);
}

TEST(Solve, ZeroCostProblem) {
    BidsOptions bids;
    bids.epsilon = 1e-9;
    const Solution s = solve(zero_cost(), {}, bids);
    EXPECT_EQ(s.v_star, 0.0);
    EXPECT_EQ(s.iterations, 1);
}

TEST(Solve, WithoutDiscountReturnsTheOneShotOptimum) {
    const auto spec = retail_exp(0.0);
    const Solution s = solve(spec);
    double one_shot = INFINITY;
    const Grid g(6.0, 201);
    for (std::size_t i = 0; i < g.size(); ++i)
        one_shot = std::min(one_shot, g.knot(i) + expected_stage_cost(spec, g.knot(i), 0));
    EXPECT_NEAR(s.v_star, one_shot, s.epsilon);
    // continuous optimum at the fractile: c z* + 5 loss(z*) + z* - 1
    const double z = std::log(2.5);
    const double exact = z + 5.0 * std::exp(-z) + z - 1.0;
    EXPECT_NEAR(s.v_star, exact, 1e-3);
}

TEST(Solve, DefaultToleranceAndResidual) {
    const Solution s = solve(water_reference());
    EXPECT_DOUBLE_EQ(s.epsilon, 1e-6 * s.upper_bound);
    EXPECT_LE(std::abs(s.residual()), s.epsilon + 10.0 * s.quadrature_tolerance);
    EXPECT_EQ(s.sweep.v, s.v_star);
    EXPECT_EQ(s.phi, s.sweep.grid().knot(s.phi_index));
    ASSERT_FALSE(s.bracket_history.empty());
    for (std::size_t i = 1; i < s.bracket_history.size(); ++i) {
        const auto [lo0, hi0] = s.bracket_history[i - 1];
        const auto [lo1, hi1] = s.bracket_history[i];
        EXPECT_GE(lo1, lo0);
        EXPECT_LE(hi1, hi0);
        EXPECT_NEAR(hi1 - lo1, 0.5 * (hi0 - lo0), 1e-12 * hi0);
    }
}

TEST(Solve, BracketTracksTheFixedPoint) {
    const auto spec = water_reference();
    const BellmanOperator op(spec);
    const Solution s = solve(op);
    for (const auto& [lo, hi] : s.bracket_history) {
        EXPECT_LE(lo, s.v_star + s.epsilon);
        EXPECT_GE(hi, s.v_star - s.epsilon);
    }
    // below v* the map lies above the diagonal, above v* below it
    EXPECT_GT(op.reset_state_value(op.sweep(s.v_star - 1.0)).value, s.v_star - 1.0);
    EXPECT_LT(op.reset_state_value(op.sweep(s.v_star + 1.0)).value, s.v_star + 1.0);
}

TEST(Solve, ExplicitToleranceIsHonoured) {
    BidsOptions bids;
    bids.epsilon = 1e-9;
    const Solution s = solve(water_reference(), {}, bids);
    EXPECT_EQ(s.epsilon, 1e-9);
    EXPECT_LE(std::abs(s.residual()), 1e-9 + 10.0 * s.quadrature_tolerance);
}

TEST(Solve, IterationCapRaisesDiagnostics) {
    BidsOptions bids;
    bids.epsilon = 1e-12;
    bids.max_iterations = 3;
    EXPECT_THROW(solve(water_reference(), {}, bids), SolverDiagnosticsError);
}

TEST(Solve, TrapezoidRuleGivesTheSameAnswer) {
    SolverOptions trap;
    trap.quadrature.rule = QuadratureRule::trapezoid;
    const Solution a = solve(water_reference());
    const Solution b = solve(water_reference(), trap);
    EXPECT_NEAR(a.v_star, b.v_star, 1e-3 * (1.0 + a.v_star));
}
