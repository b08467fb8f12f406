#pragma once

#include "resetinv/bids.hpp"
#include "resetinv/oracle.hpp"
#include "resetinv/structure.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace resetinv {

/// `%.9g`, with "inf" for +infinity.
std::string format_number(double value);

/// Numbers pass through; +infinity becomes the string "inf".
nlohmann::json number_or_inf(double value);
double number_or_inf(const nlohmann::json& value);

nlohmann::json problem_to_json(const ProblemSpec& spec);
ProblemSpec problem_from_json(const nlohmann::json& doc);

nlohmann::json certificate_to_json(const GammaCertificate& certificate);

/// Everything a solve produces that later commands need: the instance, the
/// grid, v*, the thresholds, the certificate, the value table and the knot
/// policy tables for t = 0..k-1.
struct SolutionRecord {
    SolutionRecord(ProblemSpec spec_, SolverOptions solver_) : spec(std::move(spec_)), solver(solver_) {}

    ProblemSpec spec;
    SolverOptions solver;
    double v_star = 0.0;
    double epsilon = 0.0;
    double upsilon = 0.0;
    double upper_bound = 0.0;
    double quadrature_tolerance = 0.0;
    int iterations = 0;
    double phi = 0.0;
    std::vector<RowThresholds> thresholds;
    bool contiguous = true;
    nlohmann::json certificate;
    std::vector<std::vector<double>> values;  ///< t = 0..k
    std::vector<std::vector<std::uint8_t>> reset;
    std::vector<std::vector<std::size_t>> target;

    Grid grid() const { return Grid(spec.c_max(), solver.knots); }
};

SolutionRecord make_record(const ProblemSpec& spec, const SolverOptions& solver, const Solution& solution,
                           const ThresholdPolicy& policy, const GammaCertificate& certificate);

nlohmann::json to_json(const SolutionRecord& record);
/// Throws std::invalid_argument on a malformed document.
SolutionRecord record_from_json(const nlohmann::json& doc);

ThresholdPolicy policy_from_record(const SolutionRecord& record);

/// `t,x,action,order_up_to`, one row per knot and t = 0..k-1.
std::string policy_csv(const SolutionRecord& record);
/// `t,x,value`, one row per knot and t = 0..k.
std::string value_csv(const SolutionRecord& record);

nlohmann::json rollout_to_json(const RolloutReport& report);

/// Outcome of the structure and oracle checks on one instance.
struct VerifyOutcome {
    nlohmann::json report;
    std::string text;
    bool passed = true;
};

/// Hard failures: an uncertifiable instance, oracle disagreement, and, when
/// the discount factor is certified, any structure check. Above the bound
/// the structure checks are reported without failing.
VerifyOutcome verify_instance(const ProblemSpec& spec, const SolverOptions& solver, const BidsOptions& bids,
                              const ValueIterationOptions& oracle = {});

}  // namespace resetinv
