#pragma once

#include "resetinv/bids.hpp"
#include "resetinv/model.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace resetinv {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Discount-factor bound under which the four-threshold policy is optimal.
struct GammaCertificate {
    std::vector<double> gamma_t;  ///< per t = 0..k-1; +inf when eta_k = 0 makes the bound vacuous
    double gamma_bound = 0.0;     ///< min over gamma_t, clipped to 1
    std::vector<double> M;        ///< derivative bound of J(., t), t = 0..k
    StructureConstants constants;
    double c = 0.0;
    double density_lipschitz = 0.0;  ///< L
    double density_sup = 0.0;        ///< P
    double c_max = 0.0;
    double gamma = 0.0;              ///< the instance's discount factor
    bool certifiable = true;         ///< false when some m_t <= 0
    bool certified = false;          ///< certifiable and gamma <= gamma_bound
    std::string reason;
};

GammaCertificate gamma_bounds(const ProblemSpec& spec, std::size_t mesh_points = 2001);

enum class Region : std::uint8_t { reset_low, order_up, do_nothing, reset_high };

std::string to_string(Region region);

/// (sigma, s, S, Sigma) for one t. Thresholds are knot coordinates or +inf.
struct RowThresholds {
    double sigma = kInfinity;
    double s = kInfinity;
    std::optional<double> order_up_to;  ///< S; empty when the order region is
    double Sigma = kInfinity;
};

struct RowExtraction {
    RowThresholds thresholds;
    std::vector<Region> labels;
    bool contiguous = true;
    std::vector<std::string> violations;
};

/// Labels one t-row of the tabulated policy and reads off its thresholds.
RowExtraction extract_row(std::span<const std::uint8_t> reset, std::span<const std::size_t> target,
                          const Grid& grid);

/// Action at a state: reset or not, and the post-order stock level (phi
/// after a reset, x itself when holding).
struct Decision {
    bool reset = false;
    double order_up_to = 0.0;
};

class Policy {
public:
    virtual ~Policy() = default;
    /// Throws std::out_of_range when the policy has no action at (x, t).
    virtual Decision decide(double x, int t) const = 0;
    /// Post-reset order level, used for the forced reset at t = k.
    virtual double reset_order_level() const = 0;
};

class ThresholdPolicy : public Policy {
public:
    std::vector<RowThresholds> rows;  ///< t = 0..k-1
    double phi = 0.0;
    std::vector<std::vector<Region>> labels;
    bool contiguous = true;
    std::vector<std::string> violations;

    Decision decide(double x, int t) const override;
    double reset_order_level() const override { return phi; }
};

ThresholdPolicy extract_thresholds(const Solution& solution, const ProblemSpec& spec);

/// Whether the thresholds reproduce the tabulated reset flags and order
/// targets at every knot.
bool replays_exactly(const ThresholdPolicy& policy, const SweepResult& sweep);

/// Checks of the (s, S) conditions on the tabulated G(., t).
struct SsConditionReport {
    int t = 0;
    double tolerance = 0.0;
    std::size_t S_index = 0;
    bool s_exists = false;
    std::size_t s_index = 0;
    bool convex = true;  ///< second differences of G >= -tolerance
    bool c1 = true;      ///< G(S) + K = G(s), crossing located within one grid step
    bool c2 = true;      ///< G nonincreasing on [0, s]
    bool c3 = true;      ///< G(S) + K <= G(z) on [0, s]
    bool c4 = true;      ///< G(y) <= G(z) + K for s <= y <= z
    double crossing = 0.0;  ///< interpolated root of G(z) = G(S) + K in [s, s + h]
    std::vector<std::string> notes;

    bool passed() const { return c1 && c2 && c3 && c4; }
};

SsConditionReport verify_sS_conditions(const ProblemSpec& spec, const Solution& solution, int t);

/// Checks of the four-piece form of J(., t) against the extracted policy.
struct ValueFormReport {
    int t = 0;
    bool reset_pieces = true;
    bool order_piece = true;
    bool hold_piece = true;
    bool slope_bound = true;
    double max_piece_error = 0.0;
    double max_slope = 0.0;
    double slope_limit = 0.0;
    std::vector<std::string> notes;

    bool passed() const { return reset_pieces && order_piece && hold_piece && slope_bound; }
};

ValueFormReport verify_value_form(const ProblemSpec& spec, const Solution& solution,
                                  const ThresholdPolicy& policy, const GammaCertificate& certificate, int t,
                                  const QuadratureOptions& quadrature = {});

/// Total width of the reset regions in row t, counted in knots times step.
double reset_measure(const ThresholdPolicy& policy, const Grid& grid, int t);

}  // namespace resetinv
