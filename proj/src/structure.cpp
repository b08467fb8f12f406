#include "resetinv/structure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace resetinv {

std::string to_string(Region region) {
    switch (region) {
    case Region::reset_low: return "reset_low";
    case Region::order_up: return "order_up";
    case Region::do_nothing: return "do_nothing";
    case Region::reset_high: return "reset_high";
    }
    return "unknown";
}

GammaCertificate gamma_bounds(const ProblemSpec& spec, std::size_t mesh_points) {
    GammaCertificate cert;
    cert.constants = structure_constants(spec, mesh_points);
    const DensityBounds bounds = spec.demand().density_bounds();
    cert.density_lipschitz = bounds.lipschitz;
    cert.density_sup = bounds.sup;
    cert.c = spec.costs().unit_order;
    cert.c_max = spec.c_max();
    cert.gamma = spec.gamma();

    const auto& m = cert.constants.m;
    const auto& kappa = cert.constants.kappa;
    const auto& eta = cert.constants.eta;
    const auto k = static_cast<std::size_t>(spec.k());
    const double smoothing = cert.density_lipschitz * cert.c_max + cert.density_sup;

    cert.gamma_t.resize(k);
    cert.gamma_t[k - 1] = eta[k] > 0.0 ? m[k - 1] / (smoothing * eta[k]) : kInfinity;
    for (std::size_t t = 0; t + 1 < k; ++t)
        cert.gamma_t[t] = m[t] / (smoothing * (eta[t + 1] + cert.c + kappa[t + 1]) + m[t + 1]);

    cert.M.resize(k + 1);
    for (std::size_t t = 0; t < k; ++t) cert.M[t] = eta[t] + cert.c + kappa[t] + m[t] / smoothing;
    cert.M[k] = eta[k];

    if (!cert.constants.strongly_convex) {
        cert.certifiable = false;
        cert.certified = false;
        cert.gamma_bound = 0.0;
        std::ostringstream msg;
        msg << "m_t ≤ 0 at t =";
        for (int t : cert.constants.violating_t) msg << ' ' << t;
        cert.reason = msg.str();
        return cert;
    }

    cert.gamma_bound = std::min(1.0, *std::min_element(cert.gamma_t.begin(), cert.gamma_t.end()));
    cert.certified = cert.gamma <= cert.gamma_bound;
    if (!cert.certified) {
        std::ostringstream msg;
        msg << "gamma = " << cert.gamma << " exceeds the bound " << cert.gamma_bound;
        cert.reason = msg.str();
    }
    return cert;
}

RowExtraction extract_row(std::span<const std::uint8_t> reset, std::span<const std::size_t> target,
                          const Grid& grid) {
    const std::size_t n = grid.size();
    if (reset.size() != n || target.size() != n) throw std::invalid_argument("extract_row: row size mismatch");

    RowExtraction out;
    out.labels.resize(n);
    bool seen_open = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (reset[i]) {
            out.labels[i] = seen_open ? Region::reset_high : Region::reset_low;
        } else {
            seen_open = true;
            out.labels[i] = target[i] > i ? Region::order_up : Region::do_nothing;
        }
    }

    for (std::size_t i = 1; i < n; ++i) {
        if (out.labels[i] < out.labels[i - 1]) {
            out.contiguous = false;
            std::ostringstream msg;
            msg << to_string(out.labels[i]) << " at knot " << i << " (x = " << grid.knot(i) << ") follows "
                << to_string(out.labels[i - 1]);
            out.violations.push_back(msg.str());
        }
    }

    auto& th = out.thresholds;
    const auto first_of = [&](auto pred, std::size_t from) {
        std::size_t i = from;
        while (i < n && !pred(out.labels[i])) ++i;
        return i;
    };
    const std::size_t sigma = first_of([](Region r) { return r != Region::reset_low; }, 0);
    if (sigma == n) return out;  // always reset: sigma = s = Sigma = +inf

    const std::size_t s = first_of([](Region r) { return r != Region::order_up; }, sigma);
    const std::size_t Sigma = first_of([](Region r) { return r == Region::reset_high; }, sigma);
    th.sigma = grid.knot(sigma);
    th.s = s < n ? grid.knot(s) : kInfinity;
    th.Sigma = Sigma < n ? grid.knot(Sigma) : kInfinity;

    std::optional<std::size_t> order_index;
    for (std::size_t i = sigma; i < s; ++i) {
        if (!order_index) {
            order_index = target[i];
        } else if (target[i] != *order_index) {
            out.contiguous = false;
            std::ostringstream msg;
            msg << "order-up-to level changes at knot " << i << " (" << grid.knot(*order_index) << " -> "
                << grid.knot(target[i]) << ")";
            out.violations.push_back(msg.str());
        }
    }
    if (order_index) {
        th.order_up_to = grid.knot(*order_index);
        if (*order_index < sigma || (Sigma < n && *order_index > Sigma)) {
            out.contiguous = false;
            out.violations.push_back("order-up-to level lies outside [sigma, Sigma]");
        }
    }
    return out;
}

Decision ThresholdPolicy::decide(double x, int t) const {
    if (t < 0 || static_cast<std::size_t>(t) >= rows.size()) {
        std::ostringstream msg;
        msg << "threshold policy undefined at state (x = " << x << ", t = " << t << ")";
        throw std::out_of_range(msg.str());
    }
    const RowThresholds& row = rows[static_cast<std::size_t>(t)];
    if (x < row.sigma || x >= row.Sigma) return {true, phi};
    if (x < row.s) return {false, row.order_up_to.value_or(x)};
    return {false, x};
}

ThresholdPolicy extract_thresholds(const Solution& solution, const ProblemSpec& spec) {
    const SweepResult& sweep = solution.sweep;
    const Grid& grid = sweep.grid();
    ThresholdPolicy policy;
    policy.phi = solution.phi;
    for (int t = 0; t < spec.k(); ++t) {
        const auto row = static_cast<std::size_t>(t);
        RowExtraction extraction = extract_row(sweep.reset[row], sweep.target[row], grid);
        policy.rows.push_back(extraction.thresholds);
        policy.labels.push_back(std::move(extraction.labels));
        if (!extraction.contiguous) policy.contiguous = false;
        for (auto& v : extraction.violations) policy.violations.push_back("t = " + std::to_string(t) + ": " + v);
    }
    return policy;
}

bool replays_exactly(const ThresholdPolicy& policy, const SweepResult& sweep) {
    const Grid& grid = sweep.grid();
    for (std::size_t t = 0; t < policy.rows.size(); ++t) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.knot(i);
            const Decision d = policy.decide(x, static_cast<int>(t));
            if (d.reset != static_cast<bool>(sweep.reset[t][i])) return false;
            if (!d.reset && d.order_up_to != grid.knot(sweep.target[t][i])) return false;
        }
    }
    return true;
}

SsConditionReport verify_sS_conditions(const ProblemSpec& spec, const Solution& solution, int t) {
    if (t < 0 || t >= spec.k()) throw std::out_of_range("verify_sS_conditions: t outside 0..k-1");
    const auto& g = solution.sweep.g[static_cast<std::size_t>(t)];
    const Grid& grid = solution.sweep.grid();
    const std::size_t n = g.size();
    const double K = spec.costs().fixed_order;

    SsConditionReport rep;
    rep.t = t;
    double scale = 1.0;
    for (double v : g) scale = std::max(scale, 1.0 + std::abs(v));
    rep.tolerance = 1e-6 * scale;
    const double tol = rep.tolerance;

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (g[i + 1] - 2.0 * g[i] + g[i - 1] < -tol) {
            rep.convex = false;
            rep.notes.push_back("G not convex at knot " + std::to_string(i));
            break;
        }
    }

    rep.S_index = static_cast<std::size_t>(std::min_element(g.begin(), g.end()) - g.begin());
    const double level = g[rep.S_index] + K;
    for (std::size_t j = rep.S_index + 1; j-- > 0;) {
        if (g[j] >= level) {
            rep.s_exists = true;
            rep.s_index = j;
            break;
        }
    }

    std::size_t c4_from = 0;
    if (rep.s_exists) {
        const std::size_t s = rep.s_index;
        if (s == rep.S_index) {
            rep.crossing = grid.knot(s);
            rep.c1 = std::abs(g[s] - level) <= tol;
        } else {
            // G(s) >= level > G(s + 1): the root is bracketed within one step
            const double drop = g[s] - g[s + 1];
            rep.c1 = g[s] >= level - tol && g[s + 1] <= level + tol && drop > 0.0;
            rep.crossing = grid.knot(s) + grid.step() * (drop > 0.0 ? (g[s] - level) / drop : 0.0);
        }
        for (std::size_t j = 0; j < s && rep.c2; ++j) rep.c2 = g[j + 1] <= g[j] + tol;
        for (std::size_t j = 0; j <= s && rep.c3; ++j) rep.c3 = level <= g[j] + tol;
        c4_from = s;
    } else {
        rep.notes.push_back("s' does not exist: G(z) < G(S') + K on [0, S'], ordering is never optimal");
    }

    // s' is the crossing itself, where G equals G(S) + K; the knot s may sit
    // up to one step to its left, so the scan starts after it
    double running_max = -kInfinity;
    if (rep.s_exists && rep.s_index < rep.S_index) {
        running_max = level;
        c4_from = rep.s_index + 1;
    }
    for (std::size_t z = c4_from; z < n && rep.c4; ++z) {
        running_max = std::max(running_max, g[z]);
        rep.c4 = running_max <= g[z] + K + tol;
    }
    if (!rep.c1) rep.notes.push_back("C1 failed");
    if (!rep.c2) rep.notes.push_back("C2 failed");
    if (!rep.c3) rep.notes.push_back("C3 failed");
    if (!rep.c4) rep.notes.push_back("C4 failed");
    return rep;
}

ValueFormReport verify_value_form(const ProblemSpec& spec, const Solution& solution,
                                  const ThresholdPolicy& policy, const GammaCertificate& certificate, int t,
                                  const QuadratureOptions& quadrature) {
    if (t < 0 || t >= spec.k()) throw std::out_of_range("verify_value_form: t outside 0..k-1");
    const auto row = static_cast<std::size_t>(t);
    const TabulatedFunction& J = solution.sweep.values[row];
    const TabulatedFunction& next = solution.sweep.values[row + 1];
    const Grid& grid = J.grid();
    const auto& labels = policy.labels[row];
    const double c = spec.costs().unit_order;
    const double K = spec.costs().fixed_order;

    ValueFormReport rep;
    rep.t = t;
    auto check = [&](bool& flag, double expected, double actual, std::size_t i, const char* piece) {
        const double err = std::abs(actual - expected);
        rep.max_piece_error = std::max(rep.max_piece_error, err);
        if (err > 1e-6 * (1.0 + std::abs(actual))) {
            if (flag) rep.notes.push_back(std::string(piece) + " piece mismatch at knot " + std::to_string(i));
            flag = false;
        }
    };

    const auto& row_th = policy.rows[row];
    double order_base = 0.0;
    if (row_th.order_up_to) {
        const double S = *row_th.order_up_to;
        order_base = c * S + K + expected_stage_cost(spec, S, t) +
                     spec.gamma() * expected_continuation(next, spec.demand(), S, quadrature);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.knot(i);
        const double value = J.at_knot(i);
        switch (labels[i]) {
        case Region::reset_low:
        case Region::reset_high:
            check(rep.reset_pieces, solution.v_star + expected_reset_cost(spec, x, t), value, i, "reset");
            break;
        case Region::order_up:
            check(rep.order_piece, order_base - c * x, value, i, "order");
            if (i + 1 < grid.size() && labels[i + 1] == Region::order_up) {
                const double slope = (J.at_knot(i + 1) - value) / grid.step();
                if (std::abs(slope + c) > 1e-6 * (1.0 + c)) {
                    if (rep.order_piece) rep.notes.push_back("order piece slope differs from -c");
                    rep.order_piece = false;
                }
            }
            break;
        case Region::do_nothing:
            check(rep.hold_piece,
                  expected_stage_cost(spec, x, t) +
                      spec.gamma() * expected_continuation(next, spec.demand(), x, quadrature),
                  value, i, "do-nothing");
            break;
        }
    }

    rep.max_slope = J.max_abs_slope();
    rep.slope_limit = certificate.M.at(row);
    rep.slope_bound = rep.max_slope <= rep.slope_limit + 1e-6 * (1.0 + rep.slope_limit);
    if (!rep.slope_bound) rep.notes.push_back("slope exceeds M_t");
    return rep;
}

double reset_measure(const ThresholdPolicy& policy, const Grid& grid, int t) {
    const auto& labels = policy.labels.at(static_cast<std::size_t>(t));
    const auto count = std::count_if(labels.begin(), labels.end(), [](Region r) {
        return r == Region::reset_low || r == Region::reset_high;
    });
    return static_cast<double>(count) * grid.step();
}

}  // namespace resetinv
