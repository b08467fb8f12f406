#pragma once

#include "resetinv/bids.hpp"
#include "resetinv/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace resetinv {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses the instance config grammar into a JSON object:
///
///     # comment
///     key = value
///
/// where a value is a number, a "string", true/false, an array [v, ...] or an
/// inline table { key = value, ... }. Arrays and tables may span lines.
/// Throws ConfigError with a line number on malformed input.
nlohmann::json parse_config_text(std::string_view text);

struct InstanceConfig {
    ProblemSpec spec;
    SolverOptions solver;
    BidsOptions bids;
    std::uint64_t seed = 1;
    std::size_t paths = 20000;
    int horizon = 0;
    std::string output_dir = "out";
    std::optional<std::string> solution_path;
};

/// Schema validation and range checks; throws ConfigError.
InstanceConfig config_from_json(const nlohmann::json& doc);
InstanceConfig load_config(const std::filesystem::path& path);

}  // namespace resetinv
