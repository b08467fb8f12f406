#pragma once

#include "resetinv/demand.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace resetinv {

enum class ProblemKind { water, retail };

std::string to_string(ProblemKind kind);

/// Cost data shared by both instance kinds. `holding` is indexed by the
/// epochs-since-reset counter t = 0..k-1; retail instances repeat a single
/// constant.
struct CostParameters {
    double unit_order = 0.0;   ///< c (c_u)
    double fixed_order = 0.0;  ///< K (k_u); zero for water
    double reset_unit = 0.0;   ///< c_r
    double reset_fixed = 0.0;  ///< k_r; zero for water
    double shortage = 0.0;     ///< p
    std::vector<double> holding;  ///< q(t)
};

/// A complete, validated problem instance. Immutable after construction.
class ProblemSpec {
public:
    ProblemSpec(ProblemKind kind, CostParameters costs, DemandModel demand, double c_max, int k,
                double gamma);

    static ProblemSpec water(double c, double c_r, double p, std::vector<double> q, DemandModel demand,
                             double c_max, int k, double gamma);
    static ProblemSpec retail(double c, double K, double c_r, double k_r, double p, double q,
                              DemandModel demand, double c_max, int k, double gamma);

    ProblemKind kind() const { return kind_; }
    const CostParameters& costs() const { return costs_; }
    const DemandModel& demand() const { return demand_; }
    double c_max() const { return c_max_; }
    int k() const { return k_; }
    double gamma() const { return gamma_; }
    /// The reset state; always zero.
    double zeta() const { return 0.0; }

    double holding(int t) const;

    /// Water instances need p - q(t) > 0 for every t for the structural
    /// results to apply. Retail instances are always valid.
    bool structure_guaranteed() const;

    ProblemSpec with_gamma(double gamma) const;
    ProblemSpec with_costs(CostParameters costs) const;
    /// Every cost parameter multiplied by `factor` > 0.
    ProblemSpec scaled(double factor) const;

private:
    ProblemKind kind_;
    CostParameters costs_;
    DemandModel demand_;
    double c_max_;
    int k_;
    double gamma_;
};

struct State {
    double x = 0.0;  ///< stock on hand
    int t = 0;       ///< epochs since the last reset
};

/// One epoch of the reset dynamics. `u` is the order placed after the reset
/// decision; it must fit the remaining capacity.
State transition(const ProblemSpec& spec, State s, bool reset, double u, double w);

/// H(z, t): expected holding, shortage and health cost of one epoch at
/// post-order stock z.
double expected_stage_cost(const ProblemSpec& spec, double z, int t);

/// R(x, t): reset cost of discarding stock x.
double expected_reset_cost(const ProblemSpec& spec, double x, int t);

/// Realized one-epoch cost for pseudo-state (xi, tau), order u and demand w,
/// excluding any reset cost. Its expectation over w is c u + K 1(u>0) + H(xi+u, tau).
double realized_stage_cost(const ProblemSpec& spec, double xi, int tau, double u, double w);

/// Constants of the smoothness and convexity assumptions, t = 0..k-1,
/// plus the terminal reset slope eta_k.
struct StructureConstants {
    std::vector<double> m;      ///< strong convexity of H(., t) on [0, c_max]
    std::vector<double> kappa;  ///< sup |dH/dz| on [0, c_max]
    std::vector<double> eta;    ///< sup |dR/dx|, t = 0..k (eta has k+1 entries)
    std::vector<double> reset_lipschitz;  ///< L_t of dR/dx
    double density_min = 0.0;   ///< min f on the [0, c_max] mesh
    bool strongly_convex = true;
    std::vector<int> violating_t;  ///< t with m_t <= 0
};

StructureConstants structure_constants(const ProblemSpec& spec, std::size_t mesh_points = 2001);

}  // namespace resetinv
