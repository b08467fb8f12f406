#include "resetinv/structure.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace resetinv;

namespace {

ProblemSpec water_reference(double gamma = 0.9) {
    std::vector<double> q;
    for (int t = 0; t < 7; ++t) q.push_back(1.0 + 0.3 * t);
    return ProblemSpec::water(1.0, 0.5, 5.0, q, DemandModel::truncated_normal(2.0, 1.0), 6.0, 7, gamma);
}

ProblemSpec retail_fixed(double gamma = 0.9, double K = 2.0) {
    return ProblemSpec::retail(1.0, K, 0.5, 1.0, 4.0, 1.0, DemandModel::truncated_normal(2.0, 1.0), 6.0, 7, gamma);
}

ProblemSpec certified(const ProblemSpec& spec) { return spec.with_gamma(0.9 * gamma_bounds(spec).gamma_bound); }

}  // namespace

TEST(GammaBounds, NoDiscountIsAlwaysCertified) {
    const auto cert = gamma_bounds(water_reference(0.0));
    EXPECT_TRUE(cert.certifiable);
    EXPECT_TRUE(cert.certified);
    EXPECT_GT(cert.gamma_bound, 0.0);
}

TEST(GammaBounds, RetailExponentialPlugIn) {
    const auto spec = ProblemSpec::retail(1.0, 0.0, 0.5, 0.0, 4.0, 1.0, DemandModel::exponential(1.0), 6.0, 3, 0.9);
    const auto cert = gamma_bounds(spec);
    EXPECT_DOUBLE_EQ(cert.density_lipschitz, 1.0);
    EXPECT_DOUBLE_EQ(cert.density_sup, 1.0);
    EXPECT_DOUBLE_EQ(cert.constants.density_min, std::exp(-6.0));
    const double m = 5.0 * std::exp(-6.0);
    const double kappa = 4.0;
    const double eta = 0.5;
    const double smooth = 1.0 * 6.0 + 1.0;
    ASSERT_EQ(cert.gamma_t.size(), 3u);
    EXPECT_DOUBLE_EQ(cert.gamma_t[2], m / (smooth * eta));
    EXPECT_DOUBLE_EQ(cert.gamma_t[0], m / (smooth * (eta + 1.0 + kappa) + m));
    EXPECT_DOUBLE_EQ(cert.gamma_t[1], cert.gamma_t[0]);
    EXPECT_DOUBLE_EQ(cert.gamma_bound, std::min(cert.gamma_t[0], cert.gamma_t[2]));
    ASSERT_EQ(cert.M.size(), 4u);
    EXPECT_DOUBLE_EQ(cert.M[0], eta + 1.0 + kappa + m / smooth);
    EXPECT_EQ(cert.M[3], 0.5);
    EXPECT_FALSE(cert.certified);
    EXPECT_TRUE(cert.certifiable);
}

TEST(GammaBounds, FreeTerminalResetMakesTheLastBoundVacuous) {
    const auto spec = ProblemSpec::retail(1.0, 0.0, 0.0, 1.0, 4.0, 1.0, DemandModel::exponential(1.0), 6.0, 3, 0.5);
    const auto cert = gamma_bounds(spec);
    EXPECT_TRUE(std::isinf(cert.gamma_t[2]));
    EXPECT_LE(cert.gamma_bound, 1.0);
}

TEST(GammaBounds, WaterWithHealthCostAtShortageIsUncertifiable) {
    const auto spec = ProblemSpec::water(1, 0.5, 3.0, {1.0, 2.0, 3.0}, DemandModel::exponential(1), 6, 3, 0.5);
    const auto cert = gamma_bounds(spec);
    EXPECT_FALSE(cert.certifiable);
    EXPECT_FALSE(cert.certified);
    EXPECT_NE(cert.reason.find("m_t ≤ 0"), std::string::npos);
    EXPECT_NE(cert.reason.find("2"), std::string::npos);
}

TEST(ExtractRow, SyntheticRow) {
    const Grid grid(6.0, 7);
    const std::vector<std::uint8_t> reset{1, 1, 0, 0, 0, 0, 1};
    const std::vector<std::size_t> target{0, 1, 4, 4, 4, 5, 6};
    const RowExtraction row = extract_row(reset, target, grid);
    EXPECT_TRUE(row.contiguous);
    EXPECT_EQ(row.thresholds.sigma, grid.knot(2));
    EXPECT_EQ(row.thresholds.s, grid.knot(4));
    EXPECT_EQ(row.thresholds.Sigma, grid.knot(6));
    ASSERT_TRUE(row.thresholds.order_up_to.has_value());
    EXPECT_EQ(*row.thresholds.order_up_to, grid.knot(4));
    EXPECT_EQ(row.labels, (std::vector<Region>{Region::reset_low, Region::reset_low, Region::order_up,
                                               Region::order_up, Region::do_nothing, Region::do_nothing,
                                               Region::reset_high}));
}

TEST(ExtractRow, AllResetRowUsesInfinity) {
    const Grid grid(6.0, 5);
    const std::vector<std::uint8_t> reset(5, 1);
    const std::vector<std::size_t> target{0, 1, 2, 3, 4};
    const RowExtraction row = extract_row(reset, target, grid);
    EXPECT_TRUE(std::isinf(row.thresholds.sigma));
    EXPECT_TRUE(std::isinf(row.thresholds.s));
    EXPECT_TRUE(std::isinf(row.thresholds.Sigma));
    EXPECT_FALSE(row.thresholds.order_up_to.has_value());
    EXPECT_TRUE(row.contiguous);
}

TEST(ExtractRow, FlagsInterleavedRegions) {
    const Grid grid(6.0, 6);
    const std::vector<std::uint8_t> reset{0, 0, 1, 0, 0, 0};
    const std::vector<std::size_t> target{1, 1, 2, 3, 5, 5};
    const RowExtraction row = extract_row(reset, target, grid);
    EXPECT_FALSE(row.contiguous);
    EXPECT_FALSE(row.violations.empty());
}

TEST(ExtractRow, FlagsChangingOrderLevel) {
    const Grid grid(6.0, 6);
    const std::vector<std::uint8_t> reset(6, 0);
    const std::vector<std::size_t> target{3, 4, 4, 3, 4, 5};
    EXPECT_FALSE(extract_row(reset, target, grid).contiguous);
}

TEST(ThresholdPolicy, ReplaysTheSolverTablesExactly) {
    for (const auto& spec : {water_reference(), retail_fixed()}) {
        const Solution s = solve(spec);
        const ThresholdPolicy policy = extract_thresholds(s, spec);
        EXPECT_TRUE(policy.contiguous);
        EXPECT_TRUE(replays_exactly(policy, s.sweep));
        EXPECT_EQ(policy.reset_order_level(), s.phi);
        EXPECT_THROW(policy.decide(1.0, spec.k()), std::out_of_range);
    }
}

TEST(ThresholdPolicy, CertifiedWaterLastRowIsOrdered) {
    const auto spec = certified(water_reference());
    ASSERT_TRUE(gamma_bounds(spec).certified);
    const Solution s = solve(spec);
    const ThresholdPolicy policy = extract_thresholds(s, spec);
    const auto& labels = policy.labels.back();
    EXPECT_TRUE(std::is_sorted(labels.begin(), labels.end()));
    const auto& row = policy.rows.back();
    EXPECT_LE(row.sigma, row.s);
    EXPECT_LE(row.s, row.Sigma);
}

TEST(SsConditions, NewsvendorWithoutFixedCost) {
    const auto spec = retail_fixed(0.0, 0.0);
    const Solution s = solve(spec);
    for (int t = 0; t < spec.k(); ++t) {
        const SsConditionReport rep = verify_sS_conditions(spec, s, t);
        EXPECT_TRUE(rep.passed());
        EXPECT_TRUE(rep.convex);
        EXPECT_TRUE(rep.s_exists);
        EXPECT_EQ(rep.s_index, rep.S_index);
    }
}

TEST(SsConditions, CertifiedRetailEveryRow) {
    const auto spec = certified(retail_fixed());
    const Solution s = solve(spec);
    for (int t = 0; t < spec.k(); ++t) {
        const SsConditionReport rep = verify_sS_conditions(spec, s, t);
        EXPECT_TRUE(rep.passed()) << "t = " << t;
        EXPECT_GE(rep.crossing, s.sweep.grid().knot(rep.s_index));
        EXPECT_LE(rep.crossing, s.sweep.grid().knot(rep.s_index) + s.sweep.grid().step());
    }
}

TEST(SsConditions, HugeFixedCostRemovesOrdering) {
    const auto spec = retail_fixed(0.0, 1000.0);
    const Solution s = solve(spec);
    const ThresholdPolicy policy = extract_thresholds(s, spec);
    for (int t = 0; t < spec.k(); ++t) {
        const SsConditionReport rep = verify_sS_conditions(spec, s, t);
        EXPECT_FALSE(rep.s_exists);
        EXPECT_FALSE(rep.notes.empty());
        EXPECT_TRUE(rep.passed());
        EXPECT_FALSE(policy.rows[t].order_up_to.has_value());
        for (Region r : policy.labels[t]) EXPECT_NE(r, Region::order_up);
    }
}

TEST(ValueForm, PiecesAndSlopeBound) {
    for (const auto& base : {water_reference(), retail_fixed()}) {
        const auto spec = certified(base);
        const auto cert = gamma_bounds(spec);
        const Solution s = solve(spec);
        const ThresholdPolicy policy = extract_thresholds(s, spec);
        for (int t = 0; t < spec.k(); ++t) {
            const ValueFormReport rep = verify_value_form(spec, s, policy, cert, t);
            EXPECT_TRUE(rep.passed()) << to_string(spec.kind()) << " t = " << t;
            EXPECT_LE(rep.max_slope, rep.slope_limit);
        }
    }
}

TEST(ValueForm, PiecesHoldAboveTheBoundToo) {
    const auto spec = retail_fixed();
    const auto cert = gamma_bounds(spec);
    const Solution s = solve(spec);
    const ThresholdPolicy policy = extract_thresholds(s, spec);
    for (int t = 0; t < spec.k(); ++t) {
        const ValueFormReport rep = verify_value_form(spec, s, policy, cert, t);
        EXPECT_TRUE(rep.reset_pieces && rep.order_piece && rep.hold_piece) << "t = " << t;
    }
}

TEST(ResetMeasure, CountsResetKnots) {
    const auto spec = water_reference();
    const Solution s = solve(spec);
    const ThresholdPolicy policy = extract_thresholds(s, spec);
    const Grid& grid = s.sweep.grid();
    for (int t = 0; t < spec.k(); ++t) {
        double expected = 0.0;
        for (auto r : s.sweep.reset[t]) expected += r ? grid.step() : 0.0;
        EXPECT_NEAR(reset_measure(policy, grid, t), expected, 1e-12 * grid.c_max());
    }
}

// Randomized certified instances: the extracted policy has at most four
// ordered regions and the (s, S) conditions hold at every t.
TEST(Property, CertifiedInstancesAreContiguous) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 24; ++trial) {
        const bool water = trial % 2 == 0;
        const DemandModel demand = trial % 3 == 0 ? DemandModel::exponential(0.5 + u(rng))
                                                  : DemandModel::truncated_normal(1.0 + 2.0 * u(rng), 0.5 + u(rng));
        const double c = 0.5 + u(rng);
        const double p = 3.0 + 4.0 * u(rng);
        const int k = 2 + trial % 6;
        ProblemSpec spec = water ? [&] {
            std::vector<double> q;
            const double q0 = 0.5 * u(rng), slope = 0.3 * u(rng);
            for (int t = 0; t < k; ++t) q.push_back(q0 + slope * t);
            return ProblemSpec::water(c, 0.2 + u(rng), p, q, demand, 6.0, k, 0.5);
        }()
                                 : ProblemSpec::retail(c, 2.0 * u(rng), 0.2 + u(rng), u(rng), p, 0.5 + u(rng),
                                                       demand, 6.0, k, 0.5);
        spec = certified(spec);
        ASSERT_TRUE(gamma_bounds(spec).certified);
        const Solution s = solve(spec, SolverOptions{101, {}});
        const ThresholdPolicy policy = extract_thresholds(s, spec);
        EXPECT_TRUE(policy.contiguous) << "trial " << trial;
        for (int t = 0; t < k; ++t)
            EXPECT_TRUE(verify_sS_conditions(spec, s, t).passed()) << "trial " << trial << " t = " << t;
    }
}

// Raising the shortage penalty never lowers the post-reset order level.
TEST(Property, OrderLevelIsMonotoneInShortageCost) {
    for (const bool water : {true, false}) {
        double previous = -1.0;
        for (double p : {3.0, 4.0, 5.0, 6.5, 8.0, 12.0}) {
            const ProblemSpec spec = water ? ProblemSpec::water(1.0, 0.5, p, {1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2},
                                                                DemandModel::truncated_normal(2.0, 1.0), 6.0, 7, 0.9)
                                           : retail_fixed(0.9).with_costs([&] {
                                                 CostParameters costs = retail_fixed().costs();
                                                 costs.shortage = p;
                                                 return costs;
                                             }());
            const double phi = solve(spec).phi;
            EXPECT_GE(phi, previous) << (water ? "water" : "retail") << " p = " << p;
            previous = phi;
        }
    }
}

// Refining the grid moves every finite threshold by at most two coarse steps.
TEST(Property, ThresholdsAreStableUnderRefinement) {
    for (const auto& spec : {water_reference(), retail_fixed()}) {
        const Solution coarse = solve(spec, SolverOptions{201, {}});
        const Solution fine = solve(spec, SolverOptions{401, {}});
        const auto a = extract_thresholds(coarse, spec);
        const auto b = extract_thresholds(fine, spec);
        const double tol = 2.0 * coarse.sweep.grid().step() + 1e-12;
        auto close = [&](double x, double y) { return (std::isinf(x) && std::isinf(y)) || std::abs(x - y) <= tol; };
        for (int t = 0; t < spec.k(); ++t) {
            EXPECT_TRUE(close(a.rows[t].sigma, b.rows[t].sigma)) << "t = " << t;
            EXPECT_TRUE(close(a.rows[t].s, b.rows[t].s)) << "t = " << t;
            EXPECT_TRUE(close(a.rows[t].Sigma, b.rows[t].Sigma)) << "t = " << t;
            EXPECT_EQ(a.rows[t].order_up_to.has_value(), b.rows[t].order_up_to.has_value());
            if (a.rows[t].order_up_to && b.rows[t].order_up_to) {
                EXPECT_TRUE(close(*a.rows[t].order_up_to, *b.rows[t].order_up_to)) << "t = " << t;
            }
        }
        EXPECT_TRUE(close(coarse.phi, fine.phi));
    }
}
