#include "resetinv/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace resetinv {

using nlohmann::json;

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    json document() {
        json doc = json::object();
        for (;;) {
            skip(true);
            if (pos_ >= text_.size()) return doc;
            const std::size_t key_line = line_;
            const std::string key = identifier();
            skip(false);
            expect('=');
            skip(false);
            json value = parse_value();
            if (doc.contains(key)) fail("duplicate key '" + key + "'", key_line);
            doc[key] = std::move(value);
            skip(false);
            if (pos_ < text_.size() && text_[pos_] != '\n') fail("expected end of line after value");
        }
    }

private:
    [[noreturn]] void fail(const std::string& what, std::size_t line = 0) const {
        std::ostringstream msg;
        msg << "config line " << (line ? line : line_) << ": " << what;
        throw ConfigError(msg.str());
    }

    // Skips blanks and comments; newlines only when `newlines` is set.
    void skip(bool newlines) {
        while (pos_ < text_.size()) {
            const char ch = text_[pos_];
            if (ch == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (ch == '\n' && newlines) {
                ++line_;
                ++pos_;
            } else if (ch == ' ' || ch == '\t' || ch == '\r') {
                ++pos_;
            } else {
                return;
            }
        }
    }

    void expect(char ch) {
        if (pos_ >= text_.size() || text_[pos_] != ch) fail(std::string("expected '") + ch + "'");
        ++pos_;
    }

    std::string identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (start == pos_) fail("expected a key");
        return std::string(text_.substr(start, pos_ - start));
    }

    json parse_value() {
        if (pos_ >= text_.size()) fail("expected a value");
        const char ch = text_[pos_];
        if (ch == '"') return string_literal();
        if (ch == '[') return array();
        if (ch == '{') return table();
        if (std::isalpha(static_cast<unsigned char>(ch))) {
            const std::string word = identifier();
            if (word == "true") return true;
            if (word == "false") return false;
            fail("unexpected word '" + word + "' (strings need double quotes)");
        }
        return number();
    }

    json string_literal() {
        expect('"');
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            char ch = text_[pos_++];
            if (ch == '\n') fail("unterminated string");
            if (ch == '\\' && pos_ < text_.size()) {
                const char esc = text_[pos_++];
                ch = esc == 'n' ? '\n' : esc == 't' ? '\t' : esc;
            }
            out.push_back(ch);
        }
        expect('"');
        return out;
    }

    json number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                       text_[pos_] == '-' || text_[pos_] == '+'))
            ++pos_;
        const std::string token(text_.substr(start, pos_ - start));
        if (token.empty()) fail("expected a value");
        const bool integral = token.find_first_of(".eE") == std::string::npos;
        std::size_t used = 0;
        try {
            if (integral) {
                const long long value = std::stoll(token, &used);
                if (used == token.size()) return value;
            } else {
                const double value = std::stod(token, &used);
                if (used == token.size() && std::isfinite(value)) return value;
            }
        } catch (const std::exception&) {
        }
        fail("malformed number '" + token + "'");
    }

    json array() {
        expect('[');
        json out = json::array();
        skip(true);
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return out;
        }
        for (;;) {
            skip(true);
            out.push_back(parse_value());
            skip(true);
            if (pos_ < text_.size() && text_[pos_] == ',') {
                ++pos_;
                skip(true);
                if (pos_ < text_.size() && text_[pos_] == ']') {
                    ++pos_;
                    return out;
                }
                continue;
            }
            expect(']');
            return out;
        }
    }

    json table() {
        expect('{');
        json out = json::object();
        skip(true);
        if (pos_ < text_.size() && text_[pos_] == '}') {
            ++pos_;
            return out;
        }
        for (;;) {
            skip(true);
            const std::string key = identifier();
            skip(true);
            expect('=');
            skip(true);
            json value = parse_value();
            if (out.contains(key)) fail("duplicate key '" + key + "'");
            out[key] = std::move(value);
            skip(true);
            if (pos_ < text_.size() && text_[pos_] == ',') {
                ++pos_;
                skip(true);
                if (pos_ < text_.size() && text_[pos_] == '}') {
                    ++pos_;
                    return out;
                }
                continue;
            }
            expect('}');
            return out;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    return obj.at(key);
}

double number_at(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number()) throw ConfigError("'" + key + "' in " + where + " must be a number");
    return v.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
    return obj.contains(key) ? number_at(obj, key, where) : fallback;
}

long long integer_at(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer()) throw ConfigError("'" + key + "' in " + where + " must be an integer");
    return v.get<long long>();
}

std::string string_at(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) throw ConfigError("'" + key + "' in " + where + " must be a string");
    return v.get<std::string>();
}

const json& table_at(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_object()) throw ConfigError("'" + key + "' in " + where + " must be a { ... } table");
    return v;
}

void check_range(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

DemandModel demand_from(const json& block) {
    const std::string where = "demand";
    const std::string family = string_at(block, "family", where);
    if (family == "truncated_normal") {
        reject_unknown(block, {"family", "mu", "sigma"}, where);
        const double mu = number_at(block, "mu", where);
        const double sigma = number_at(block, "sigma", where);
        check_range(sigma > 0.0, "demand.sigma must be positive");
        return DemandModel::truncated_normal(mu, sigma);
    }
    if (family == "exponential") {
        reject_unknown(block, {"family", "lambda"}, where);
        const double rate = number_at(block, "lambda", where);
        check_range(rate > 0.0, "demand.lambda must be positive");
        return DemandModel::exponential(rate);
    }
    throw ConfigError("demand.family must be \"truncated_normal\" or \"exponential\"");
}

std::vector<double> holding_from(const json& costs, ProblemKind kind, int k) {
    const json& q = require(costs, "q", "costs");
    if (kind == ProblemKind::retail) {
        if (!q.is_number()) throw ConfigError("costs.q must be a scalar for retail instances");
        return {q.get<double>()};
    }
    std::vector<double> table;
    if (q.is_array()) {
        for (const auto& v : q) {
            if (!v.is_number()) throw ConfigError("costs.q entries must be numbers");
            table.push_back(v.get<double>());
        }
        if (table.size() != static_cast<std::size_t>(k))
            throw ConfigError("costs.q must list k = " + std::to_string(k) + " values for water instances");
    } else if (q.is_object()) {
        // linear ramp q(t) = start + slope * t
        reject_unknown(q, {"start", "slope"}, "costs.q");
        const double start = number_at(q, "start", "costs.q");
        const double slope = number_at(q, "slope", "costs.q");
        for (int t = 0; t < k; ++t) table.push_back(start + slope * t);
    } else {
        throw ConfigError("costs.q must be an array of k values or { start, slope } for water instances");
    }
    for (std::size_t t = 0; t < table.size(); ++t) {
        check_range(table[t] >= 0.0, "costs.q must be nonnegative");
        if (t > 0) check_range(table[t] >= table[t - 1], "costs.q must be nondecreasing in t for water instances");
    }
    return table;
}

}  // namespace

json parse_config_text(std::string_view text) { return Parser(text).document(); }

InstanceConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a set of key = value entries");
    const std::string where = "config";
    reject_unknown(doc,
                   {"problem", "gamma", "k", "c_max", "grid", "epsilon", "seed", "paths", "horizon", "output_dir",
                    "solution", "quadrature", "costs", "demand"},
                   where);

    const std::string problem = string_at(doc, "problem", where);
    if (problem != "water" && problem != "retail") throw ConfigError("problem must be \"water\" or \"retail\"");
    const ProblemKind kind = problem == "water" ? ProblemKind::water : ProblemKind::retail;

    const double gamma = number_at(doc, "gamma", where);
    check_range(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
    const long long k = integer_at(doc, "k", where);
    check_range(k >= 1 && k <= 10000, "k must be an integer >= 1");
    const double c_max = number_at(doc, "c_max", where);
    check_range(c_max > 0.0, "c_max must be positive");

    const json& costs_block = table_at(doc, "costs", where);
    reject_unknown(costs_block, {"c_u", "k_u", "c_r", "k_r", "p", "q"}, "costs");
    CostParameters costs;
    costs.unit_order = number_at(costs_block, "c_u", "costs");
    costs.fixed_order = number_or(costs_block, "k_u", 0.0, "costs");
    costs.reset_unit = number_at(costs_block, "c_r", "costs");
    costs.reset_fixed = number_or(costs_block, "k_r", 0.0, "costs");
    costs.shortage = number_at(costs_block, "p", "costs");
    for (double v : {costs.unit_order, costs.fixed_order, costs.reset_unit, costs.reset_fixed, costs.shortage})
        check_range(v >= 0.0, "cost parameters must be nonnegative");
    if (kind == ProblemKind::water)
        check_range(costs.fixed_order == 0.0 && costs.reset_fixed == 0.0,
                    "water instances take no k_u or k_r (both must be 0)");
    costs.holding = holding_from(costs_block, kind, static_cast<int>(k));

    const DemandModel demand = demand_from(table_at(doc, "demand", where));

    SolverOptions solver;
    if (doc.contains("grid")) {
        const long long knots = integer_at(doc, "grid", where);
        check_range(knots >= 2 && knots <= 100001, "grid must be an integer knot count >= 2");
        solver.knots = static_cast<std::size_t>(knots);
    }
    if (doc.contains("quadrature")) {
        const json& q = table_at(doc, "quadrature", where);
        reject_unknown(q, {"rule", "mesh"}, "quadrature");
        if (q.contains("rule")) {
            const std::string rule = string_at(q, "rule", "quadrature");
            if (rule == "exact") solver.quadrature.rule = QuadratureRule::exact;
            else if (rule == "trapezoid") solver.quadrature.rule = QuadratureRule::trapezoid;
            else throw ConfigError("quadrature.rule must be \"exact\" or \"trapezoid\"");
        }
        if (q.contains("mesh")) {
            const long long mesh = integer_at(q, "mesh", "quadrature");
            check_range(mesh >= 2, "quadrature.mesh must be >= 2");
            solver.quadrature.mesh_points = static_cast<std::size_t>(mesh);
        }
    }

    BidsOptions bids;
    if (doc.contains("epsilon")) {
        bids.epsilon = number_at(doc, "epsilon", where);
        check_range(bids.epsilon > 0.0, "epsilon must be positive");
    }

    InstanceConfig out{ProblemSpec(kind, std::move(costs), demand, c_max, static_cast<int>(k), gamma), solver, bids,
                       1, 20000, 0, "out", std::nullopt};
    if (doc.contains("seed")) {
        const long long seed = integer_at(doc, "seed", where);
        check_range(seed >= 0, "seed must be nonnegative");
        out.seed = static_cast<std::uint64_t>(seed);
    }
    if (doc.contains("paths")) {
        const long long paths = integer_at(doc, "paths", where);
        check_range(paths >= 1, "paths must be >= 1");
        out.paths = static_cast<std::size_t>(paths);
    }
    if (doc.contains("horizon")) {
        const long long horizon = integer_at(doc, "horizon", where);
        check_range(horizon >= 0, "horizon must be >= 0 (0 picks it from the tail tolerance)");
        out.horizon = static_cast<int>(horizon);
    }
    if (doc.contains("output_dir")) out.output_dir = string_at(doc, "output_dir", where);
    if (doc.contains("solution")) out.solution_path = string_at(doc, "solution", where);
    return out;
}

InstanceConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return config_from_json(parse_config_text(buffer.str()));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace resetinv
