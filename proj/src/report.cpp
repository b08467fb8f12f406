#include "resetinv/report.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace resetinv {

using nlohmann::json;

std::string format_number(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

json number_or_inf(double value) {
    if (std::isinf(value)) return value > 0 ? json("inf") : json("-inf");
    return value;
}

double number_or_inf(const json& value) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        const auto text = value.get<std::string>();
        if (text == "inf") return kInfinity;
        if (text == "-inf") return -kInfinity;
    }
    throw std::invalid_argument("expected a number or \"inf\", got " + value.dump());
}

namespace {

const json& field(const json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key))
        throw std::invalid_argument(std::string("solution file: missing field '") + key + "'");
    return doc.at(key);
}

double number_field(const json& doc, const char* key) {
    const json& v = field(doc, key);
    if (!v.is_number()) throw std::invalid_argument(std::string("solution file: '") + key + "' must be a number");
    return v.get<double>();
}

template <class T>
std::vector<std::vector<T>> table_field(const json& doc, const char* key) {
    try {
        return field(doc, key).get<std::vector<std::vector<T>>>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("solution file: '") + key + "' is not a table: " + e.what());
    }
}

json thresholds_to_json(const RowThresholds& row, double phi, int t) {
    json out;
    out["t"] = t;
    out["sigma"] = number_or_inf(row.sigma);
    out["s"] = number_or_inf(row.s);
    out["S"] = row.order_up_to ? json(*row.order_up_to) : json(nullptr);
    out["Sigma"] = number_or_inf(row.Sigma);
    out["phi"] = phi;
    return out;
}

RowThresholds thresholds_from_json(const json& doc) {
    RowThresholds row;
    row.sigma = number_or_inf(field(doc, "sigma"));
    row.s = number_or_inf(field(doc, "s"));
    const json& S = field(doc, "S");
    if (!S.is_null()) row.order_up_to = number_or_inf(S);
    row.Sigma = number_or_inf(field(doc, "Sigma"));
    return row;
}

json vector_or_inf(const std::vector<double>& values) {
    json out = json::array();
    for (double v : values) out.push_back(number_or_inf(v));
    return out;
}

}  // namespace

json problem_to_json(const ProblemSpec& spec) {
    const CostParameters& c = spec.costs();
    json costs;
    costs["c_u"] = c.unit_order;
    costs["k_u"] = c.fixed_order;
    costs["c_r"] = c.reset_unit;
    costs["k_r"] = c.reset_fixed;
    costs["p"] = c.shortage;
    if (spec.kind() == ProblemKind::retail) costs["q"] = c.holding.front();
    else costs["q"] = c.holding;

    json demand;
    demand["family"] = to_string(spec.demand().family());
    if (spec.demand().family() == DemandFamily::truncated_normal) {
        demand["mu"] = spec.demand().mu();
        demand["sigma"] = spec.demand().sigma();
    } else {
        demand["lambda"] = spec.demand().rate();
    }

    json out;
    out["problem"] = to_string(spec.kind());
    out["gamma"] = spec.gamma();
    out["k"] = spec.k();
    out["c_max"] = spec.c_max();
    out["costs"] = costs;
    out["demand"] = demand;
    return out;
}

ProblemSpec problem_from_json(const json& doc) {
    const std::string problem = field(doc, "problem").get<std::string>();
    if (problem != "water" && problem != "retail") throw std::invalid_argument("solution file: unknown problem kind");
    const json& costs = field(doc, "costs");
    CostParameters c;
    c.unit_order = number_field(costs, "c_u");
    c.fixed_order = number_field(costs, "k_u");
    c.reset_unit = number_field(costs, "c_r");
    c.reset_fixed = number_field(costs, "k_r");
    c.shortage = number_field(costs, "p");
    const json& q = field(costs, "q");
    c.holding = q.is_array() ? q.get<std::vector<double>>() : std::vector<double>{q.get<double>()};

    const json& d = field(doc, "demand");
    const std::string family = field(d, "family").get<std::string>();
    const DemandModel demand = family == "exponential" ? DemandModel::exponential(number_field(d, "lambda"))
                                                       : DemandModel::truncated_normal(number_field(d, "mu"),
                                                                                       number_field(d, "sigma"));
    return ProblemSpec(problem == "water" ? ProblemKind::water : ProblemKind::retail, std::move(c), demand,
                       number_field(doc, "c_max"), field(doc, "k").get<int>(), number_field(doc, "gamma"));
}

json certificate_to_json(const GammaCertificate& cert) {
    json out;
    out["certifiable"] = cert.certifiable;
    out["certified"] = cert.certified;
    out["gamma"] = cert.gamma;
    out["gamma_bound"] = number_or_inf(cert.gamma_bound);
    out["gamma_t"] = vector_or_inf(cert.gamma_t);
    out["M"] = vector_or_inf(cert.M);
    out["m"] = cert.constants.m;
    out["kappa"] = cert.constants.kappa;
    out["eta"] = cert.constants.eta;
    out["density_min"] = cert.constants.density_min;
    out["density_lipschitz"] = cert.density_lipschitz;
    out["density_sup"] = cert.density_sup;
    out["c"] = cert.c;
    out["c_max"] = cert.c_max;
    out["reason"] = cert.reason;
    return out;
}

SolutionRecord make_record(const ProblemSpec& spec, const SolverOptions& solver, const Solution& solution,
                           const ThresholdPolicy& policy, const GammaCertificate& certificate) {
    SolutionRecord rec(spec, solver);
    rec.v_star = solution.v_star;
    rec.epsilon = solution.epsilon;
    rec.upsilon = solution.upsilon;
    rec.upper_bound = solution.upper_bound;
    rec.quadrature_tolerance = solution.quadrature_tolerance;
    rec.iterations = solution.iterations;
    rec.phi = solution.phi;
    rec.thresholds = policy.rows;
    rec.contiguous = policy.contiguous;
    rec.certificate = certificate_to_json(certificate);
    for (const auto& row : solution.sweep.values) rec.values.emplace_back(row.values().begin(), row.values().end());
    const auto k = static_cast<std::size_t>(spec.k());
    rec.reset.assign(solution.sweep.reset.begin(), solution.sweep.reset.begin() + k);
    rec.target.assign(solution.sweep.target.begin(), solution.sweep.target.begin() + k);
    return rec;
}

json to_json(const SolutionRecord& rec) {
    json out;
    out["problem"] = problem_to_json(rec.spec);
    out["grid"] = {{"knots", rec.solver.knots},
                   {"quadrature",
                    {{"rule", rec.solver.quadrature.rule == QuadratureRule::exact ? "exact" : "trapezoid"},
                     {"mesh", rec.solver.quadrature.mesh_points}}}};
    out["v_star"] = rec.v_star;
    out["epsilon"] = rec.epsilon;
    out["upsilon"] = rec.upsilon;
    out["upper_bound"] = rec.upper_bound;
    out["quadrature_tolerance"] = rec.quadrature_tolerance;
    out["iterations"] = rec.iterations;
    out["phi"] = rec.phi;
    out["contiguous"] = rec.contiguous;
    json rows = json::array();
    for (std::size_t t = 0; t < rec.thresholds.size(); ++t)
        rows.push_back(thresholds_to_json(rec.thresholds[t], rec.phi, static_cast<int>(t)));
    out["thresholds"] = rows;
    out["certificate"] = rec.certificate;
    out["values"] = rec.values;
    out["reset"] = rec.reset;
    out["target"] = rec.target;
    return out;
}

SolutionRecord record_from_json(const json& doc) {
    try {
        SolutionRecord rec(problem_from_json(field(doc, "problem")), SolverOptions{});
        const json& grid = field(doc, "grid");
        rec.solver.knots = field(grid, "knots").get<std::size_t>();
        const json& quad = field(grid, "quadrature");
        const std::string rule = field(quad, "rule").get<std::string>();
        if (rule != "exact" && rule != "trapezoid") throw std::invalid_argument("solution file: unknown rule");
        rec.solver.quadrature.rule = rule == "exact" ? QuadratureRule::exact : QuadratureRule::trapezoid;
        rec.solver.quadrature.mesh_points = field(quad, "mesh").get<std::size_t>();
        rec.v_star = number_field(doc, "v_star");
        rec.epsilon = number_field(doc, "epsilon");
        rec.upsilon = number_field(doc, "upsilon");
        rec.upper_bound = number_field(doc, "upper_bound");
        rec.quadrature_tolerance = number_field(doc, "quadrature_tolerance");
        rec.iterations = field(doc, "iterations").get<int>();
        rec.phi = number_field(doc, "phi");
        rec.contiguous = field(doc, "contiguous").get<bool>();
        for (const auto& row : field(doc, "thresholds")) rec.thresholds.push_back(thresholds_from_json(row));
        rec.certificate = field(doc, "certificate");
        rec.values = table_field<double>(doc, "values");
        rec.reset = table_field<std::uint8_t>(doc, "reset");
        rec.target = table_field<std::size_t>(doc, "target");

        const auto k = static_cast<std::size_t>(rec.spec.k());
        const std::size_t n = rec.solver.knots;
        bool ok = rec.thresholds.size() == k && rec.values.size() == k + 1 && rec.reset.size() == k &&
                  rec.target.size() == k && n >= 2;
        for (std::size_t t = 0; ok && t <= k; ++t) ok = rec.values[t].size() == n;
        for (std::size_t t = 0; ok && t < k; ++t) {
            ok = rec.reset[t].size() == n && rec.target[t].size() == n;
            for (std::size_t i = 0; ok && i < n; ++i) ok = rec.target[t][i] < n && rec.reset[t][i] <= 1;
        }
        if (!ok) throw std::invalid_argument("solution file: table shapes do not match k and the grid");
        return rec;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("solution file: ") + e.what());
    }
}

ThresholdPolicy policy_from_record(const SolutionRecord& record) {
    ThresholdPolicy policy;
    policy.rows = record.thresholds;
    policy.phi = record.phi;
    policy.contiguous = record.contiguous;
    return policy;
}

std::string policy_csv(const SolutionRecord& record) {
    const Grid grid = record.grid();
    std::ostringstream out;
    out << "t,x,action,order_up_to\n";
    for (std::size_t t = 0; t < record.reset.size(); ++t) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            out << t << ',' << format_number(grid.knot(i)) << ',';
            if (record.reset[t][i]) out << "reset,";
            else if (record.target[t][i] > i) out << "order," << format_number(grid.knot(record.target[t][i]));
            else out << "hold,";
            out << '\n';
        }
    }
    return out.str();
}

std::string value_csv(const SolutionRecord& record) {
    const Grid grid = record.grid();
    std::ostringstream out;
    out << "t,x,value\n";
    for (std::size_t t = 0; t < record.values.size(); ++t)
        for (std::size_t i = 0; i < grid.size(); ++i)
            out << t << ',' << format_number(grid.knot(i)) << ',' << format_number(record.values[t][i]) << '\n';
    return out.str();
}

json rollout_to_json(const RolloutReport& report) {
    json out;
    out["mean_discounted_cost"] = report.mean_discounted_cost;
    out["std_error"] = report.std_error;
    out["n_paths"] = report.n_paths;
    out["horizon"] = report.horizon;
    out["seed"] = report.seed;
    out["tail_bound"] = report.tail_bound;
    out["longest_segment"] = report.longest_segment;
    return out;
}

namespace {

struct CheckRow {
    std::string name;
    int t = -1;
    bool passed = true;
    bool hard = true;
    std::string detail;
};

std::string join(const std::vector<std::string>& notes) {
    std::string out;
    for (const auto& note : notes) out += (out.empty() ? "" : "; ") + note;
    return out;
}

}  // namespace

VerifyOutcome verify_instance(const ProblemSpec& spec, const SolverOptions& solver, const BidsOptions& bids,
                              const ValueIterationOptions& oracle) {
    const GammaCertificate cert = gamma_bounds(spec);
    const Solution solution = solve(spec, solver, bids);
    const ThresholdPolicy policy = extract_thresholds(solution, spec);
    const bool structural = cert.certified;

    std::vector<CheckRow> checks;
    {
        CheckRow row{"certifiable", -1, cert.certifiable, true, cert.certifiable ? "m_t > 0 for every t" : cert.reason};
        checks.push_back(row);
    }
    {
        std::ostringstream d;
        d << "gamma = " << format_number(cert.gamma) << ", bound = " << format_number(cert.gamma_bound);
        checks.push_back({"gamma_within_bound", -1, cert.certified, false, d.str()});
    }
    {
        const double residual = std::abs(solution.residual());
        const double allowed = solution.epsilon + 10.0 * solution.quadrature_tolerance;
        std::ostringstream d;
        d << "|Upsilon(v*) - v*| = " << format_number(residual) << " <= " << format_number(allowed);
        checks.push_back({"fixed_point", -1, residual <= allowed, true, d.str()});
    }
    {
        const auto k = static_cast<std::size_t>(spec.k());
        const auto& terminal = solution.sweep.values[k];
        const BellmanOperator op(spec, solver);
        const auto reset = op.reset_row(spec.k());
        bool exact = true;
        for (std::size_t i = 0; i < terminal.grid().size(); ++i)
            exact = exact && terminal.at_knot(i) == solution.v_star + reset[i];
        checks.push_back({"terminal_row", -1, exact, true, "J(x, k) = v* + R(x, k) at every knot"});
    }

    for (int t = 0; t < spec.k(); ++t) {
        const RowExtraction row = extract_row(solution.sweep.reset[static_cast<std::size_t>(t)],
                                              solution.sweep.target[static_cast<std::size_t>(t)],
                                              solution.sweep.grid());
        checks.push_back({"regions_contiguous", t, row.contiguous, structural, join(row.violations)});
        const SsConditionReport ss = verify_sS_conditions(spec, solution, t);
        std::ostringstream d;
        d << "C1 " << ss.c1 << " C2 " << ss.c2 << " C3 " << ss.c3 << " C4 " << ss.c4 << " convex " << ss.convex;
        if (!ss.notes.empty()) d << "; " << join(ss.notes);
        checks.push_back({"sS_conditions", t, ss.passed(), structural, d.str()});
        const ValueFormReport vf = verify_value_form(spec, solution, policy, cert, t, solver.quadrature);
        std::ostringstream v;
        v << "max piece error " << format_number(vf.max_piece_error) << ", max slope "
          << format_number(vf.max_slope) << " vs M_t " << format_number(vf.slope_limit);
        if (!vf.notes.empty()) v << "; " << join(vf.notes);
        checks.push_back({"value_form", t, vf.passed(), structural, v.str()});
    }

    ValueIterationOptions vi_options = oracle;
    vi_options.solver.knots = solver.knots;
    const ValueIterationResult vi = value_iteration(spec, vi_options);
    {
        const double diff = std::abs(vi.j0 - solution.v_star);
        const double allowed = 1e-3 * (1.0 + std::abs(solution.v_star));
        std::ostringstream d;
        d << "value iteration J(0, 0) = " << format_number(vi.j0) << ", v* = " << format_number(solution.v_star)
          << ", |diff| = " << format_number(diff) << " <= " << format_number(allowed);
        checks.push_back({"oracle_agreement", -1, diff <= allowed, true, d.str()});
    }

    VerifyOutcome out;
    json rows = json::array();
    std::ostringstream text;
    text << "instance: " << to_string(spec.kind()) << ", k = " << spec.k() << ", gamma = " << format_number(spec.gamma())
         << ", n = " << solver.knots << '\n';
    text << "v* = " << format_number(solution.v_star) << ", phi = " << format_number(solution.phi) << '\n';
    text << "certificate: gamma_bound = " << format_number(cert.gamma_bound)
         << (cert.certified ? " (certified)" : " (not certified: " + cert.reason + ")") << '\n';
    if (cert.certifiable && !cert.certified) text << "structure checks are report-only above the bound\n";
    text << std::left << std::setw(20) << "check" << std::setw(5) << "t" << std::setw(8) << "result"
         << "detail\n";
    for (const auto& c : checks) {
        const bool failing = !c.passed && c.hard;
        if (failing) out.passed = false;
        const char* result = c.passed ? "pass" : (c.hard ? "FAIL" : "report");
        text << std::left << std::setw(20) << c.name << std::setw(5) << (c.t < 0 ? "-" : std::to_string(c.t))
             << std::setw(8) << result << c.detail << '\n';
        json row;
        row["name"] = c.name;
        row["t"] = c.t < 0 ? json(nullptr) : json(c.t);
        row["passed"] = c.passed;
        row["enforced"] = c.hard;
        row["detail"] = c.detail;
        rows.push_back(row);
    }
    text << "overall: " << (out.passed ? "pass" : "FAIL") << '\n';

    out.report["problem"] = problem_to_json(spec);
    out.report["v_star"] = solution.v_star;
    out.report["oracle_j0"] = vi.j0;
    out.report["certificate"] = certificate_to_json(cert);
    out.report["certified"] = cert.certified;
    out.report["checks"] = rows;
    out.report["passed"] = out.passed;
    out.text = text.str();
    return out;
}

}  // namespace resetinv
