#pragma once

#include "resetinv/bellman.hpp"
#include "resetinv/structure.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace resetinv {

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct ValueIterationOptions {
    /// The oracle integrates with the trapezoid rule so that it does not share
    /// the solver's closed-form expectation weights.
    SolverOptions solver{201, {QuadratureRule::trapezoid, 2001}};
    double tolerance = 1e-10;  ///< relative to 1 + |J(0, 0)|
    std::size_t max_iterations = 100000;
};

struct ValueIterationResult {
    std::vector<TabulatedFunction> values;  ///< t = 0..k
    double j0 = 0.0;
    double phi = 0.0;
    int iterations = 0;
    double residual = 0.0;
    std::vector<std::vector<std::uint8_t>> reset;  ///< greedy flags, t = 0..k
    std::vector<std::vector<std::size_t>> target;

    const Grid& grid() const { return values.front().grid(); }
};

/// Successive approximation of the coupled dynamic programming equations on
/// the full (knot, t) table. Throws ConvergenceError past max_iterations.
ValueIterationResult value_iteration(const ProblemSpec& spec, const ValueIterationOptions& options = {});

/// A policy given by its action at every knot; off-knot states use the
/// nearest knot.
class TabulatedPolicy : public Policy {
public:
    TabulatedPolicy(Grid grid, std::vector<std::vector<std::uint8_t>> reset,
                    std::vector<std::vector<std::size_t>> target, double phi);

    static TabulatedPolicy from_sweep(const SweepResult& sweep, int k, double phi);
    static TabulatedPolicy from_value_iteration(const ValueIterationResult& vi, int k);

    Decision decide(double x, int t) const override;
    double reset_order_level() const override { return phi_; }

private:
    Grid grid_;
    std::vector<std::vector<std::uint8_t>> reset_;
    std::vector<std::vector<std::size_t>> target_;
    double phi_;
};

struct RolloutOptions {
    double x0 = 0.0;
    int t0 = 0;
    int horizon = 0;  ///< zero: smallest T with gamma^T <= tail_tolerance
    std::size_t paths = 20000;
    std::uint64_t seed = 1;
    unsigned threads = 0;  ///< zero: RESETINV_THREADS or hardware concurrency
    double tail_tolerance = 1e-4;
    /// Scale of the discounted cost used in the tail bound; NaN computes the
    /// initial upper bound of the bisection.
    double value_scale = std::numeric_limits<double>::quiet_NaN();
};

struct RolloutReport {
    double mean_discounted_cost = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    int horizon = 0;
    std::uint64_t seed = 0;
    double tail_bound = 0.0;  ///< gamma^horizon * value_scale
    int longest_segment = 0;  ///< most epochs observed between resets
};

int default_horizon(double gamma, double tail_tolerance);

/// Monte Carlo estimate of the discounted cost of `policy` from (x0, t0).
RolloutReport rollout(const ProblemSpec& spec, const Policy& policy, const RolloutOptions& options = {});

/// Independent generator seed for path `index` of a run seeded with `seed`.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

unsigned thread_count(unsigned requested = 0);

}  // namespace resetinv
