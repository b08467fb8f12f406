#include "resetinv/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace resetinv {

std::string to_string(ProblemKind kind) { return kind == ProblemKind::water ? "water" : "retail"; }

namespace {

void require_nonnegative(double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value))
        throw std::invalid_argument(std::string(name) + " must be a finite nonnegative number");
}

}  // namespace

ProblemSpec::ProblemSpec(ProblemKind kind, CostParameters costs, DemandModel demand, double c_max, int k,
                         double gamma)
    : kind_(kind), costs_(std::move(costs)), demand_(demand), c_max_(c_max), k_(k), gamma_(gamma) {
    if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (!(c_max_ > 0.0) || !std::isfinite(c_max_)) throw std::invalid_argument("c_max must be positive");
    if (k_ < 1) throw std::invalid_argument("k must be at least 1");
    require_nonnegative(costs_.unit_order, "c_u");
    require_nonnegative(costs_.fixed_order, "k_u");
    require_nonnegative(costs_.reset_unit, "c_r");
    require_nonnegative(costs_.reset_fixed, "k_r");
    require_nonnegative(costs_.shortage, "p");
    if (costs_.holding.size() == 1 && k_ > 1)
        costs_.holding.assign(static_cast<std::size_t>(k_), costs_.holding.front());
    if (costs_.holding.size() != static_cast<std::size_t>(k_))
        throw std::invalid_argument("q must have one entry per t = 0..k-1");
    for (double q : costs_.holding) require_nonnegative(q, "q");
    if (kind_ == ProblemKind::water) {
        if (costs_.fixed_order != 0.0 || costs_.reset_fixed != 0.0)
            throw std::invalid_argument("water instances have no fixed order or fixed reset cost");
        if (!std::is_sorted(costs_.holding.begin(), costs_.holding.end()))
            throw std::invalid_argument("water q(t) must be nondecreasing in t");
    } else if (std::adjacent_find(costs_.holding.begin(), costs_.holding.end(), std::not_equal_to<>()) !=
               costs_.holding.end()) {
        throw std::invalid_argument("retail q must be constant");
    }
}

ProblemSpec ProblemSpec::water(double c, double c_r, double p, std::vector<double> q, DemandModel demand,
                               double c_max, int k, double gamma) {
    CostParameters costs;
    costs.unit_order = c;
    costs.reset_unit = c_r;
    costs.shortage = p;
    costs.holding = std::move(q);
    return ProblemSpec(ProblemKind::water, std::move(costs), demand, c_max, k, gamma);
}

ProblemSpec ProblemSpec::retail(double c, double K, double c_r, double k_r, double p, double q,
                                DemandModel demand, double c_max, int k, double gamma) {
    CostParameters costs;
    costs.unit_order = c;
    costs.fixed_order = K;
    costs.reset_unit = c_r;
    costs.reset_fixed = k_r;
    costs.shortage = p;
    costs.holding = {q};
    return ProblemSpec(ProblemKind::retail, std::move(costs), demand, c_max, k, gamma);
}

double ProblemSpec::holding(int t) const {
    if (t < 0 || t >= k_) throw std::out_of_range("holding cost requested outside t = 0..k-1");
    return costs_.holding[static_cast<std::size_t>(t)];
}

bool ProblemSpec::structure_guaranteed() const {
    if (kind_ == ProblemKind::retail) return true;
    return std::all_of(costs_.holding.begin(), costs_.holding.end(),
                       [&](double q) { return costs_.shortage - q > 0.0; });
}

ProblemSpec ProblemSpec::with_gamma(double gamma) const {
    return ProblemSpec(kind_, costs_, demand_, c_max_, k_, gamma);
}

ProblemSpec ProblemSpec::with_costs(CostParameters costs) const {
    return ProblemSpec(kind_, std::move(costs), demand_, c_max_, k_, gamma_);
}

ProblemSpec ProblemSpec::scaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("cost scale factor must be positive");
    CostParameters costs = costs_;
    costs.unit_order *= factor;
    costs.fixed_order *= factor;
    costs.reset_unit *= factor;
    costs.reset_fixed *= factor;
    costs.shortage *= factor;
    for (double& q : costs.holding) q *= factor;
    return with_costs(std::move(costs));
}

State transition(const ProblemSpec& spec, State s, bool reset, double u, double w) {
    const double xi = reset ? spec.zeta() : s.x;
    const int tau = reset ? 0 : s.t;
    const double room = spec.c_max() - xi;
    if (u < 0.0 || u > room + 1e-12 * spec.c_max())
        throw std::invalid_argument("order quantity outside the capacity window [0, c_max - xi]");
    if (w < 0.0) throw std::invalid_argument("demand must be nonnegative");
    const double next = std::max(0.0, xi + u - w);
    assert(next <= spec.c_max() * (1.0 + 1e-12));
    return {std::min(next, spec.c_max()), tau + 1};
}

double expected_stage_cost(const ProblemSpec& spec, double z, int t) {
    const auto& costs = spec.costs();
    const DemandModel& d = spec.demand();
    const double p = costs.shortage;
    const double q = spec.holding(t);
    if (spec.kind() == ProblemKind::water) return (p - q) * d.loss(z) + q * d.mean();
    return (p + q) * d.loss(z) + q * (z - d.mean());
}

double expected_reset_cost(const ProblemSpec& spec, double x, int /*t*/) {
    const auto& costs = spec.costs();
    return costs.reset_unit * x + costs.reset_fixed;
}

double realized_stage_cost(const ProblemSpec& spec, double xi, int tau, double u, double w) {
    const auto& costs = spec.costs();
    const double z = xi + u;
    const double shortfall = std::max(w - z, 0.0);
    double cost = costs.unit_order * u + costs.shortage * shortfall;
    if (spec.kind() == ProblemKind::water) {
        cost += spec.holding(tau) * std::min(z, w);
    } else {
        if (u > 0.0) cost += costs.fixed_order;
        cost += spec.holding(tau) * std::max(z - w, 0.0);
    }
    return cost;
}

StructureConstants structure_constants(const ProblemSpec& spec, std::size_t mesh_points) {
    if (mesh_points < 2) throw std::invalid_argument("structure_constants: mesh needs at least 2 points");
    const DemandModel& d = spec.demand();
    const auto& costs = spec.costs();
    const int k = spec.k();

    StructureConstants out;
    out.density_min = d.density(0.0);
    for (std::size_t i = 1; i < mesh_points; ++i) {
        const double w = spec.c_max() * static_cast<double>(i) / static_cast<double>(mesh_points - 1);
        out.density_min = std::min(out.density_min, d.density(w));
    }

    const double p = costs.shortage;
    for (int t = 0; t < k; ++t) {
        const double q = spec.holding(t);
        double m = 0.0;
        double kappa = 0.0;
        if (spec.kind() == ProblemKind::water) {
            m = (p - q) * out.density_min;
            kappa = std::abs(p - q);
        } else {
            m = (p + q) * out.density_min;
            // dH/dz = (p + q) F(z) - p rises from -p at z = 0
            kappa = std::max(p, (p + q) * d.cdf(spec.c_max()) - p);
        }
        out.m.push_back(m);
        out.kappa.push_back(kappa);
        out.reset_lipschitz.push_back(0.0);
        if (!(m > 0.0)) {
            out.strongly_convex = false;
            out.violating_t.push_back(t);
        }
    }
    out.eta.assign(static_cast<std::size_t>(k) + 1, costs.reset_unit);
    return out;
}

}  // namespace resetinv
