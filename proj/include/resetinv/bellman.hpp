#pragma once

#include "resetinv/demand.hpp"
#include "resetinv/model.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace resetinv {

/// Uniform knots x_i = i * c_max / (n - 1), i = 0..n-1.
class Grid {
public:
    Grid(double c_max, std::size_t n);

    double c_max() const { return c_max_; }
    std::size_t size() const { return n_; }
    double step() const { return step_; }
    double knot(std::size_t i) const;

private:
    double c_max_;
    std::size_t n_;
    double step_;
};

/// Knot values of a scalar function on a Grid, linear in between.
class TabulatedFunction {
public:
    TabulatedFunction(Grid grid, std::vector<double> values);

    /// Throws std::out_of_range outside [0, c_max].
    double operator()(double x) const;

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double at_knot(std::size_t i) const { return values_[i]; }
    double max_abs_slope() const;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// `exact` integrates the piecewise-linear interpolant against the density in
/// closed form (cdf and partial first moment). `trapezoid` applies the
/// composite trapezoid rule on a mesh refined to the interpolation knots.
enum class QuadratureRule { exact, trapezoid };

struct QuadratureOptions {
    QuadratureRule rule = QuadratureRule::exact;
    std::size_t mesh_points = 2001;  ///< trapezoid mesh over [0, c_max]
};

/// E[J((z - w)^+)] for the tabulated J.
double expected_continuation(const TabulatedFunction& next, const DemandModel& demand, double z,
                             const QuadratureOptions& quadrature = {});

/// Precomputed expectation weights for post-order levels on the knots. The
/// grid is uniform, so the weights depend only on the knot offset i - j.
class ContinuationKernel {
public:
    ContinuationKernel(const Grid& grid, const DemandModel& demand, const QuadratureOptions& quadrature);

    /// E[J((x_i - w)^+)] given J's knot values.
    double at(std::span<const double> next, std::size_t i) const;
    std::vector<double> apply(std::span<const double> next) const;

    std::size_t size() const { return tail_.size(); }

private:
    std::vector<double> near_;  // weight on J[i - d] from w in [d h, (d+1) h]
    std::vector<double> far_;   // weight on J[i - d - 1] from the same segment
    std::vector<double> tail_;  // P(w >= x_i), carried by J[0]
};

struct SolverOptions {
    std::size_t knots = 201;
    QuadratureOptions quadrature{};
};

/// Result of one backward induction for a candidate reset value v. Every
/// table has k+1 rows indexed by t; row k is the forced reset.
struct SweepResult {
    double v = 0.0;
    std::vector<TabulatedFunction> values;
    std::vector<std::vector<std::uint8_t>> reset;
    /// Knot index of the no-reset post-order level; equals the row index
    /// when nothing is ordered.
    std::vector<std::vector<std::size_t>> target;
    /// G(x_i, t) for t = 0..k-1.
    std::vector<std::vector<double>> g;

    double order_target(std::size_t i, int t) const;
    const Grid& grid() const { return values.front().grid(); }
};

struct OrderChoice {
    double value;        ///< min over z in [x_i, c_max] of G(z) + K 1(z > x_i) - c x_i
    std::size_t target;  ///< argmin knot; i itself when holding
};

struct ResetStateValue {
    double value;  ///< Upsilon(v)
    std::size_t phi_index;
    double phi;
};

/// Backward-induction machinery for one problem instance on one grid.
class BellmanOperator {
public:
    explicit BellmanOperator(ProblemSpec spec, SolverOptions options = {});

    const ProblemSpec& spec() const { return spec_; }
    const Grid& grid() const { return grid_; }
    const SolverOptions& options() const { return options_; }
    const ContinuationKernel& kernel() const { return kernel_; }

    /// c z + H(z, t) on the knots (no continuation).
    std::span<const double> stage_row(int t) const;
    std::span<const double> reset_row(int t) const;

    /// G(x_i, t) for every knot given J(., t+1) on the knots.
    std::vector<double> g_row(std::span<const double> next, int t) const;

    /// Exhaustive minimization over the knots at or above x_i.
    OrderChoice best_order(std::span<const double> g, std::size_t i) const;

    SweepResult sweep(double v) const;
    ResetStateValue reset_state_value(const SweepResult& sweep) const;

    /// Minimization over the whole grid row (Upsilon given a continuation).
    ResetStateValue reset_state_value(std::span<const double> next_row1) const;

private:
    ProblemSpec spec_;
    SolverOptions options_;
    Grid grid_;
    ContinuationKernel kernel_;
    std::vector<std::vector<double>> stage_;  // c x_i + H(x_i, t)
    std::vector<std::vector<double>> reset_;  // R(x_i, t), t = 0..k
};

double g_value(const ProblemSpec& spec, const TabulatedFunction& next, double z, int t,
               const QuadratureOptions& quadrature = {});

SweepResult sweep(const ProblemSpec& spec, double v, const SolverOptions& options = {});

/// Whether J_R wins against J_N under the reset-on-tie rule.
bool reset_preferred(double reset_value, double no_reset_value);

}  // namespace resetinv
