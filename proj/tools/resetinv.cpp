// Command-line front end: solve, verify, simulate and export.
//
// Exit codes: 0 success, 2 bad config or missing/invalid solution file,
// 3 solver diagnostics failure, 4 verification failure.

#include "resetinv/config.hpp"
#include "resetinv/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace resetinv;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerify = 4;

struct ExitError {
    int code;
    std::string message;
};

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ExitError{kExitConfig, "cannot write " + path.string()};
    out << content;
}

InstanceConfig read_config(const std::string& path) {
    try {
        return load_config(path);
    } catch (const ConfigError& e) {
        throw ExitError{kExitConfig, e.what()};
    }
}

SolutionRecord read_solution(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ExitError{kExitConfig, "solution file not found: " + path.string()};
    try {
        return record_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ExitError{kExitConfig, "solution file " + path.string() + " is not valid JSON: " + e.what()};
    } catch (const std::invalid_argument& e) {
        throw ExitError{kExitConfig, e.what()};
    }
}

SolutionRecord solve_record(const InstanceConfig& cfg) {
    const Solution solution = solve(cfg.spec, cfg.solver, cfg.bids);
    const ThresholdPolicy policy = extract_thresholds(solution, cfg.spec);
    return make_record(cfg.spec, cfg.solver, solution, policy, gamma_bounds(cfg.spec));
}

std::string json_text(const nlohmann::json& doc) { return doc.dump(1) + "\n"; }

int cmd_solve(const std::string& config_path, const std::string& out_override) {
    const InstanceConfig cfg = read_config(config_path);
    const fs::path dir = out_override.empty() ? fs::path(cfg.output_dir) : fs::path(out_override);
    const SolutionRecord record = solve_record(cfg);
    write_file(dir / "solution.json", json_text(to_json(record)));
    write_file(dir / "policy.csv", policy_csv(record));
    std::cout << "v* = " << format_number(record.v_star) << "  phi = " << format_number(record.phi)
              << "  bisection steps = " << record.iterations << '\n';
    for (std::size_t t = 0; t < record.thresholds.size(); ++t) {
        const RowThresholds& row = record.thresholds[t];
        std::cout << "t = " << t << ": sigma = " << format_number(row.sigma) << "  s = " << format_number(row.s)
                  << "  S = " << (row.order_up_to ? format_number(*row.order_up_to) : "-")
                  << "  Sigma = " << format_number(row.Sigma) << '\n';
    }
    std::cout << "certified: " << (record.certificate.at("certified").get<bool>() ? "true" : "false")
              << "\nwrote " << (dir / "solution.json").string() << " and " << (dir / "policy.csv").string()
              << '\n';
    return 0;
}

int cmd_verify(const std::string& config_path, const std::string& out_override) {
    const InstanceConfig cfg = read_config(config_path);
    const fs::path dir = out_override.empty() ? fs::path(cfg.output_dir) : fs::path(out_override);
    const VerifyOutcome outcome = verify_instance(cfg.spec, cfg.solver, cfg.bids);
    write_file(dir / "verify.json", json_text(outcome.report));
    std::cout << outcome.text;
    return outcome.passed ? 0 : kExitVerify;
}

int cmd_simulate(const std::string& config_path, const std::string& solution_override, std::size_t paths,
                 int horizon, std::int64_t seed, const std::string& out_override) {
    const InstanceConfig cfg = read_config(config_path);
    const fs::path dir = out_override.empty() ? fs::path(cfg.output_dir) : fs::path(out_override);
    std::optional<std::string> solution_path = cfg.solution_path;
    if (!solution_override.empty()) solution_path = solution_override;

    const SolutionRecord record = solution_path ? read_solution(*solution_path) : solve_record(cfg);
    const ThresholdPolicy policy = policy_from_record(record);

    RolloutOptions options;
    options.paths = paths > 0 ? paths : cfg.paths;
    options.horizon = horizon >= 0 ? horizon : cfg.horizon;
    options.seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : cfg.seed;
    options.value_scale = record.upper_bound;
    const RolloutReport report = rollout(record.spec, policy, options);

    nlohmann::json doc = rollout_to_json(report);
    doc["v_star"] = record.v_star;
    doc["difference"] = report.mean_discounted_cost - record.v_star;
    std::ostringstream tail;
    tail << "costs after epoch " << report.horizon << " are at most gamma^T * vbar0 = "
         << format_number(report.tail_bound);
    doc["tail_bound_note"] = tail.str();
    write_file(dir / "rollout.json", json_text(doc));
    std::cout << json_text(doc);
    return 0;
}

int cmd_export(const std::string& solution_path, const std::string& format, const std::string& output) {
    const SolutionRecord record = read_solution(solution_path);
    std::string content;
    if (format == "csv") content = policy_csv(record);
    else if (format == "values") content = value_csv(record);
    else content = json_text(to_json(record));
    if (output.empty()) std::cout << content;
    else write_file(output, content);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inventory control with resets: solve, verify, simulate and export"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;

    auto* solve_cmd = app.add_subcommand("solve", "Solve an instance; writes solution.json and policy.csv");
    solve_cmd->add_option("config", config_path, "instance config")->required();
    solve_cmd->add_option("--out", out_dir, "output directory (overrides output_dir)");

    auto* verify_cmd = app.add_subcommand("verify", "Certify the threshold structure and cross-check the oracle");
    verify_cmd->add_option("config", config_path, "instance config")->required();
    verify_cmd->add_option("--out", out_dir, "output directory for verify.json");

    std::size_t paths = 0;
    int horizon = -1;
    std::int64_t seed = -1;
    std::string solution_override;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo rollout of the threshold policy");
    sim_cmd->add_option("config", config_path, "instance config")->required();
    sim_cmd->add_option("--paths", paths, "number of sample paths")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--horizon", horizon, "epochs per path (0 picks from the tail tolerance)")
        ->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--seed", seed, "base seed")->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--solution", solution_override, "solution.json from a prior solve");
    sim_cmd->add_option("--out", out_dir, "output directory for rollout.json");

    std::string solution_path;
    std::string format = "csv";
    std::string output;
    auto* export_cmd = app.add_subcommand("export", "Re-export a solution file");
    export_cmd->add_option("solution", solution_path, "solution.json")->required();
    export_cmd->add_option("--format", format, "csv (policy table), values (value table) or json")
        ->check(CLI::IsMember({"csv", "values", "json"}));
    export_cmd->add_option("-o,--output", output, "write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*solve_cmd) return cmd_solve(config_path, out_dir);
        if (*verify_cmd) return cmd_verify(config_path, out_dir);
        if (*sim_cmd) return cmd_simulate(config_path, solution_override, paths, horizon, seed, out_dir);
        return cmd_export(solution_path, format, output);
    } catch (const ExitError& e) {
        std::cerr << "error: " << e.message << '\n';
        return e.code;
    } catch (const SolverDiagnosticsError& e) {
        std::cerr << "solver diagnostics: " << e.what() << '\n';
        return kExitSolver;
    } catch (const ConvergenceError& e) {
        std::cerr << "oracle diagnostics: " << e.what() << '\n';
        return kExitSolver;
    }
}
