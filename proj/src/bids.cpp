#include "resetinv/bids.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace resetinv {

namespace {

constexpr double kTailMass = 1e-10;

}  // namespace

double initial_upper_bound(const BellmanOperator& op) {
    const ProblemSpec& spec = op.spec();
    // one epoch from the reset state followed by a reset at t = 1
    const std::vector<double> g = op.g_row(op.reset_row(1), 0);
    return op.best_order(g, 0).value / (1.0 - spec.gamma());
}

double initial_upper_bound(const ProblemSpec& spec, const SolverOptions& options) {
    return initial_upper_bound(BellmanOperator(spec, options));
}

Solution solve(const BellmanOperator& op, const BidsOptions& bids) {
    Solution out;
    out.upper_bound = initial_upper_bound(op);
    out.epsilon = bids.epsilon > 0.0 ? bids.epsilon : std::max(1e-6 * out.upper_bound, 1e-12);
    out.quadrature_tolerance = kTailMass * (1.0 + out.upper_bound);

    double lo = 0.0;
    double hi = out.upper_bound;
    const double bracket_tol = 1e-9 * (1.0 + out.upper_bound);
    if (hi > 0.0) {
        const double top = op.reset_state_value(op.sweep(hi)).value;
        if (top > hi + bracket_tol) {
            std::ostringstream msg;
            msg << "bracket violation: Upsilon(v_hi) = " << top << " exceeds v_hi = " << hi;
            throw SolverDiagnosticsError(msg.str());
        }
    }

    double v_star = 0.0;
    for (;;) {
        if (static_cast<std::size_t>(out.iterations) >= bids.max_iterations)
            throw SolverDiagnosticsError("bisection did not reach the tolerance within max_iterations");
        out.bracket_history.emplace_back(lo, hi);
        const double v = 0.5 * (lo + hi);
        ++out.iterations;
        const double upsilon = op.reset_state_value(op.sweep(v)).value;
        if (out.iterations == 1 && lo == 0.0 && upsilon < -bracket_tol)
            throw SolverDiagnosticsError("bracket violation: Upsilon is negative, costs must be nonnegative");
        if (std::abs(upsilon - v) <= 0.5 * out.epsilon) {
            v_star = v;
            break;
        }
        (v > upsilon ? hi : lo) = v;
        if (hi - lo <= out.epsilon) {
            v_star = 0.5 * (lo + hi);
            break;
        }
    }

    out.v_star = v_star;
    out.sweep = op.sweep(v_star);
    const ResetStateValue reset = op.reset_state_value(out.sweep);
    out.upsilon = reset.value;
    out.phi = reset.phi;
    out.phi_index = reset.phi_index;
    return out;
}

Solution solve(const ProblemSpec& spec, const SolverOptions& options, const BidsOptions& bids) {
    return solve(BellmanOperator(spec, options), bids);
}

}  // namespace resetinv
