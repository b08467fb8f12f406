#pragma once

#include "resetinv/bellman.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace resetinv {

/// Raised when the bisection bracket does not contain the fixed point, which
/// points at a quadrature or tolerance misconfiguration.
class SolverDiagnosticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BidsOptions {
    /// Absolute bracket tolerance; zero selects 1e-6 * initial upper bound.
    double epsilon = 0.0;
    std::size_t max_iterations = 400;
};

struct Solution {
    double v_star = 0.0;
    double epsilon = 0.0;
    double upsilon = 0.0;          ///< Upsilon(v_star) from the final sweep
    double upper_bound = 0.0;      ///< initial bracket top
    double quadrature_tolerance = 0.0;
    SweepResult sweep;
    double phi = 0.0;              ///< order placed after every reset
    std::size_t phi_index = 0;
    int iterations = 0;
    std::vector<std::pair<double, double>> bracket_history;

    double residual() const { return upsilon - v_star; }
};

/// Cost of the policy that orders once from the reset state and then resets
/// every epoch, divided out over the discounted horizon.
double initial_upper_bound(const BellmanOperator& op);
double initial_upper_bound(const ProblemSpec& spec, const SolverOptions& options = {});

Solution solve(const BellmanOperator& op, const BidsOptions& bids = {});
Solution solve(const ProblemSpec& spec, const SolverOptions& options = {}, const BidsOptions& bids = {});

}  // namespace resetinv
