#include "resetinv/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace resetinv;

namespace {

ProblemSpec water_reference() {
    std::vector<double> q;
    for (int t = 0; t < 7; ++t) q.push_back(1.0 + 0.3 * t);
    return ProblemSpec::water(1.0, 0.5, 5.0, q, DemandModel::truncated_normal(2.0, 1.0), 6.0, 7, 0.9);
}

ProblemSpec retail_exp(double K = 0.0, double c_r = 0.5, double k_r = 0.0) {
    return ProblemSpec::retail(1.0, K, c_r, k_r, 4.0, 1.0, DemandModel::exponential(1.0), 6.0, 7, 0.9);
}

}  // namespace

TEST(ProblemSpec, ValidatesRanges) {
    const auto d = DemandModel::exponential(1.0);
    EXPECT_THROW(ProblemSpec::retail(1, 0, 0.5, 0, 4, 1, d, 6.0, 7, 1.0), std::invalid_argument);
    EXPECT_THROW(ProblemSpec::retail(1, 0, 0.5, 0, 4, 1, d, 6.0, 0, 0.9), std::invalid_argument);
    EXPECT_THROW(ProblemSpec::retail(1, 0, 0.5, 0, 4, 1, d, 0.0, 7, 0.9), std::invalid_argument);
    EXPECT_THROW(ProblemSpec::retail(-1, 0, 0.5, 0, 4, 1, d, 6.0, 7, 0.9), std::invalid_argument);
    EXPECT_THROW(ProblemSpec::water(1, 0.5, 5, {1.0, 2.0}, d, 6.0, 3, 0.9), std::invalid_argument);
    EXPECT_THROW(ProblemSpec::water(1, 0.5, 5, {2.0, 1.0}, d, 6.0, 2, 0.9), std::invalid_argument);
}

TEST(ProblemSpec, BroadcastsScalarHolding) {
    const auto spec = retail_exp();
    for (int t = 0; t < spec.k(); ++t) EXPECT_EQ(spec.holding(t), 1.0);
    EXPECT_THROW(spec.holding(7), std::out_of_range);
}

TEST(ProblemSpec, WaterValidityFlag) {
    EXPECT_TRUE(water_reference().structure_guaranteed());
    const auto bad = ProblemSpec::water(1, 0.5, 2.0, {1.0, 2.0, 3.0}, DemandModel::exponential(1), 6, 3, 0.9);
    EXPECT_FALSE(bad.structure_guaranteed());
    EXPECT_TRUE(retail_exp().structure_guaranteed());
}

TEST(ProblemSpec, ScalingMultipliesEveryCost) {
    const auto s = water_reference().scaled(3.0);
    EXPECT_EQ(s.costs().unit_order, 3.0);
    EXPECT_EQ(s.costs().reset_unit, 1.5);
    EXPECT_EQ(s.costs().shortage, 15.0);
    EXPECT_DOUBLE_EQ(s.holding(6), 3.0 * 2.8);
}

TEST(Transition, HoldingEpoch) {
    const auto spec = water_reference();
    const State next = transition(spec, {3.0, 2}, false, 1.0, 2.0);
    EXPECT_EQ(next.x, 2.0);
    EXPECT_EQ(next.t, 3);
}

TEST(Transition, ResetRestartsTheCount) {
    const auto spec = water_reference();
    const State next = transition(spec, {3.0, 2}, true, 1.0, 5.0);
    EXPECT_EQ(next.x, 0.0);
    EXPECT_EQ(next.t, 1);
}

TEST(Transition, ResetStateWithNoDemand) {
    const State next = transition(water_reference(), {0.0, 0}, false, 0.0, 0.0);
    EXPECT_EQ(next.x, 0.0);
    EXPECT_EQ(next.t, 1);
}

TEST(Transition, RejectsOrdersBeyondCapacity) {
    const auto spec = water_reference();
    EXPECT_THROW(transition(spec, {5.0, 1}, false, 2.0, 0.0), std::invalid_argument);
    EXPECT_THROW(transition(spec, {5.0, 1}, false, -0.1, 0.0), std::invalid_argument);
    // after a reset the whole tank is available
    EXPECT_NO_THROW(transition(spec, {5.0, 1}, true, 6.0, 0.0));
}

TEST(StageCost, RetailAtZeroIsShortageOnMean) {
    const auto spec = retail_exp();
    for (int t = 0; t < spec.k(); ++t) EXPECT_NEAR(expected_stage_cost(spec, 0.0, t), 4.0 * 1.0, 1e-13);
}

TEST(StageCost, WaterAtZeroIsShortageOnMean) {
    const auto spec = water_reference();
    const double mean = spec.demand().mean();
    for (int t = 0; t < spec.k(); ++t) EXPECT_NEAR(expected_stage_cost(spec, 0.0, t), 5.0 * mean, 1e-12);
}

TEST(StageCost, RetailExponentialAtOne) {
    const auto spec = retail_exp();
    EXPECT_NEAR(expected_stage_cost(spec, 1.0, 0), 5.0 * std::exp(-1.0), 1e-14);
    EXPECT_NEAR(expected_stage_cost(spec, 1.0, 0), 1.8394, 5e-5);
}

TEST(StageCost, RetailMatchesTwoTermQuadrature) {
    // H = q * int_0^z (z - w) f dw + p * int_z^inf (w - z) f dw
    const auto spec = ProblemSpec::retail(1, 0, 0.5, 0, 4, 1.5, DemandModel::truncated_normal(2, 1), 6, 3, 0.9);
    const auto& d = spec.demand();
    for (double z : {0.3, 1.9, 4.2}) {
        const int n = 40000;
        double under = 0.0, over = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = z * (i + 0.5) / n;
            under += (z - a) * d.density(a) * z / n;
            const double b = z + 20.0 * (i + 0.5) / n;
            over += (b - z) * d.density(b) * 20.0 / n;
        }
        EXPECT_NEAR(expected_stage_cost(spec, z, 1), 1.5 * under + 4.0 * over, 1e-6) << "z = " << z;
    }
}

TEST(StageCost, RealizedCostAveragesToExpected) {
    for (const auto& spec : {water_reference(), retail_exp(2.0)}) {
        Rng rng(5);
        const double xi = 0.7, u = 1.1;
        double sum = 0.0;
        const int n = 400000;
        for (int i = 0; i < n; ++i) sum += realized_stage_cost(spec, xi, 3, u, spec.demand().sample(rng));
        const double expected =
            spec.costs().unit_order * u + spec.costs().fixed_order + expected_stage_cost(spec, xi + u, 3);
        EXPECT_NEAR(sum / n, expected, 0.02) << to_string(spec.kind());
    }
}

TEST(ResetCost, Examples) {
    EXPECT_DOUBLE_EQ(expected_reset_cost(water_reference(), 2.0, 3), 1.0);
    EXPECT_DOUBLE_EQ(expected_reset_cost(retail_exp(0.0, 0.5, 3.0), 0.0, 1), 3.0);
    EXPECT_EQ(expected_reset_cost(water_reference(), 0.0, 0), 0.0);
}

TEST(StructureConstants, RetailTruncatedNormal) {
    const auto spec = ProblemSpec::retail(1, 0, 0.5, 0, 4, 1, DemandModel::truncated_normal(3, 1), 6, 7, 0.9);
    const auto sc = structure_constants(spec);
    double fmin = spec.demand().density(0.0);
    for (int i = 0; i <= 2000; ++i) fmin = std::min(fmin, spec.demand().density(6.0 * i / 2000.0));
    ASSERT_EQ(sc.m.size(), 7u);
    ASSERT_EQ(sc.eta.size(), 8u);
    for (int t = 0; t < 7; ++t) {
        EXPECT_NEAR(sc.m[t], 5.0 * fmin, 1e-15);
        EXPECT_GT(sc.m[t], 0.0);
        // sup |dH/dz| is attained at z = 0 where dH/dz = -p
        EXPECT_DOUBLE_EQ(sc.kappa[t], 4.0);
        EXPECT_EQ(sc.eta[t], 0.5);
        EXPECT_EQ(sc.reset_lipschitz[t], 0.0);
    }
    EXPECT_EQ(sc.eta[7], 0.5);
    EXPECT_TRUE(sc.strongly_convex);
}

TEST(StructureConstants, RetailKappaBoundsTheStageSlope) {
    const auto spec = ProblemSpec::retail(1, 0, 0.5, 0, 1, 6, DemandModel::exponential(2), 6, 2, 0.9);
    const auto sc = structure_constants(spec);
    double slope = 0.0;
    for (int i = 0; i < 600; ++i) {
        const double z = i * 0.01;
        slope = std::max(slope, std::abs(expected_stage_cost(spec, z + 0.01, 0) - expected_stage_cost(spec, z, 0)) / 0.01);
    }
    EXPECT_LE(slope, sc.kappa[0] + 1e-9);
    EXPECT_NEAR(slope, sc.kappa[0], 0.05);
}

TEST(StructureConstants, WaterEqualityFlagsZeroCurvature) {
    const auto spec = ProblemSpec::water(1, 0.5, 3.0, {1.0, 3.0, 3.0}, DemandModel::exponential(1), 6, 3, 0.9);
    const auto sc = structure_constants(spec);
    EXPECT_FALSE(sc.strongly_convex);
    EXPECT_EQ(sc.m[1], 0.0);
    EXPECT_EQ(sc.violating_t, (std::vector<int>{1, 2}));
}

TEST(StructureConstants, WaterKappaDecreasesWithAge) {
    const auto sc = structure_constants(water_reference());
    for (int t = 0; t < 7; ++t) EXPECT_NEAR(sc.kappa[t], 5.0 - (1.0 + 0.3 * t), 1e-15);
    for (int t = 1; t < 7; ++t) EXPECT_LT(sc.kappa[t], sc.kappa[t - 1]);
}
