#include "resetinv/oracle.hpp"

#include "resetinv/bids.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

namespace resetinv {

ValueIterationResult value_iteration(const ProblemSpec& spec, const ValueIterationOptions& options) {
    if (!(options.tolerance > 0.0)) throw std::invalid_argument("value_iteration: tolerance must be positive");
    const BellmanOperator op(spec, options.solver);
    const Grid& grid = op.grid();
    const std::size_t n = grid.size();
    const auto rows = static_cast<std::size_t>(spec.k()) + 1;

    std::vector<std::vector<double>> current(rows, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> next(rows, std::vector<double>(n, 0.0));
    ValueIterationResult out;
    out.reset.assign(rows, std::vector<std::uint8_t>(n, 1));
    out.target.assign(rows, std::vector<std::size_t>(n));
    for (std::size_t i = 0; i < n; ++i) out.target[rows - 1][i] = i;

    double j0 = 0.0;
    for (std::size_t iter = 1;; ++iter) {
        // J0 first, then every (x, t) from the previous iterate
        const ResetStateValue start = op.reset_state_value(current[1]);
        double residual = std::abs(start.value - j0);
        j0 = start.value;
        out.phi = start.phi;

        const auto terminal = op.reset_row(spec.k());
        for (std::size_t i = 0; i < n; ++i) next[rows - 1][i] = j0 + terminal[i];
        for (std::size_t row = 0; row + 1 < rows; ++row) {
            const int t = static_cast<int>(row);
            const std::vector<double> g = op.g_row(current[row + 1], t);
            const auto resets = op.reset_row(t);
            for (std::size_t i = 0; i < n; ++i) {
                const OrderChoice choice = op.best_order(g, i);
                const double with_reset = j0 + resets[i];
                const bool reset = reset_preferred(with_reset, choice.value);
                next[row][i] = reset ? with_reset : choice.value;
                out.reset[row][i] = reset ? 1 : 0;
                out.target[row][i] = choice.target;
            }
        }
        for (std::size_t row = 0; row < rows; ++row)
            for (std::size_t i = 0; i < n; ++i)
                residual = std::max(residual, std::abs(next[row][i] - current[row][i]));
        std::swap(current, next);

        out.iterations = static_cast<int>(iter);
        out.residual = residual;
        if (residual <= options.tolerance * (1.0 + std::abs(j0))) break;
        if (iter >= options.max_iterations) {
            std::ostringstream msg;
            msg << "value iteration did not converge in " << options.max_iterations
                << " iterations; last residual " << residual;
            throw ConvergenceError(msg.str(), residual);
        }
    }

    out.j0 = j0;
    out.values.reserve(rows);
    for (auto& row : current) out.values.emplace_back(grid, std::move(row));
    return out;
}

TabulatedPolicy::TabulatedPolicy(Grid grid, std::vector<std::vector<std::uint8_t>> reset,
                                 std::vector<std::vector<std::size_t>> target, double phi)
    : grid_(grid), reset_(std::move(reset)), target_(std::move(target)), phi_(phi) {
    if (reset_.size() != target_.size()) throw std::invalid_argument("tabulated policy: table shape mismatch");
    for (std::size_t t = 0; t < reset_.size(); ++t)
        if (reset_[t].size() != grid_.size() || target_[t].size() != grid_.size())
            throw std::invalid_argument("tabulated policy: one action per knot");
}

TabulatedPolicy TabulatedPolicy::from_sweep(const SweepResult& sweep, int k, double phi) {
    const auto rows = static_cast<std::size_t>(k);
    return TabulatedPolicy(sweep.grid(), {sweep.reset.begin(), sweep.reset.begin() + rows},
                           {sweep.target.begin(), sweep.target.begin() + rows}, phi);
}

TabulatedPolicy TabulatedPolicy::from_value_iteration(const ValueIterationResult& vi, int k) {
    const auto rows = static_cast<std::size_t>(k);
    return TabulatedPolicy(vi.grid(), {vi.reset.begin(), vi.reset.begin() + rows},
                           {vi.target.begin(), vi.target.begin() + rows}, vi.phi);
}

Decision TabulatedPolicy::decide(double x, int t) const {
    const double tol = 1e-12 * grid_.c_max();
    if (t < 0 || static_cast<std::size_t>(t) >= reset_.size() || !(x >= -tol && x <= grid_.c_max() + tol)) {
        std::ostringstream msg;
        msg << "tabulated policy undefined at state (x = " << x << ", t = " << t << ")";
        throw std::out_of_range(msg.str());
    }
    const auto row = static_cast<std::size_t>(t);
    const auto i = std::min(static_cast<std::size_t>(std::lround(std::max(x, 0.0) / grid_.step())), grid_.size() - 1);
    if (reset_[row][i]) return {true, phi_};
    if (target_[row][i] > i) return {false, std::max(grid_.knot(target_[row][i]), x)};
    return {false, x};
}

int default_horizon(double gamma, double tail_tolerance) {
    if (!(tail_tolerance > 0.0 && tail_tolerance < 1.0))
        throw std::invalid_argument("tail tolerance must lie in (0, 1)");
    if (gamma <= 0.0) return 1;
    return std::max(1, static_cast<int>(std::ceil(std::log(tail_tolerance) / std::log(gamma) - 1e-12)));
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over a golden-ratio stride
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

unsigned thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RESETINV_THREADS")) {
        const long value = std::strtol(env, nullptr, 10);
        if (value > 0) return static_cast<unsigned>(value);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct PathOutcome {
    double cost;
    int longest_segment;
};

PathOutcome simulate_path(const ProblemSpec& spec, const Policy& policy, const RolloutOptions& options, int horizon,
                          std::uint64_t index) {
    Rng rng(path_seed(options.seed, index));
    State state{options.x0, options.t0};
    const double gamma = spec.gamma();
    double discount = 1.0;
    double total = 0.0;
    int segment = options.t0;
    int longest = segment;
    for (int epoch = 0; epoch < horizon; ++epoch) {
        Decision decision = state.t >= spec.k() ? Decision{true, policy.reset_order_level()}
                                                : policy.decide(state.x, state.t);
        double xi = state.x;
        int tau = state.t;
        if (decision.reset) {
            total += discount * expected_reset_cost(spec, state.x, state.t);
            xi = spec.zeta();
            tau = 0;
        }
        if (decision.order_up_to > spec.c_max() * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "policy orders beyond capacity at state (x = " << state.x << ", t = " << state.t << ")";
            throw std::logic_error(msg.str());
        }
        const double u = std::max(0.0, decision.order_up_to - xi);
        const double w = spec.demand().sample(rng);
        total += discount * realized_stage_cost(spec, xi, tau, u, w);
        state = transition(spec, state, decision.reset, u, w);
        segment = decision.reset ? 1 : segment + 1;
        longest = std::max(longest, segment);
        if (state.t > spec.k()) throw std::logic_error("simulated path exceeded k epochs without a reset");
        discount *= gamma;
    }
    return {total, longest};
}

}  // namespace

RolloutReport rollout(const ProblemSpec& spec, const Policy& policy, const RolloutOptions& options) {
    if (options.paths < 1) throw std::invalid_argument("rollout: need at least one path");
    if (options.t0 < 0 || options.t0 > spec.k()) throw std::invalid_argument("rollout: t0 outside 0..k");
    if (options.x0 < 0.0 || options.x0 > spec.c_max()) throw std::invalid_argument("rollout: x0 outside [0, c_max]");

    RolloutReport report;
    report.n_paths = options.paths;
    report.seed = options.seed;
    report.horizon = options.horizon > 0 ? options.horizon : default_horizon(spec.gamma(), options.tail_tolerance);
    const double scale = std::isnan(options.value_scale) ? initial_upper_bound(spec) : options.value_scale;
    report.tail_bound = std::pow(spec.gamma(), report.horizon) * scale;

    std::vector<PathOutcome> outcomes(options.paths);
    const unsigned workers = std::min<std::size_t>(thread_count(options.threads), options.paths);
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) outcomes[p] = simulate_path(spec, policy, options, report.horizon, p);
    };
    if (workers <= 1) {
        run(0, options.paths);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::size_t chunk = (options.paths + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(options.paths, w * chunk);
            const std::size_t end = std::min(options.paths, begin + chunk);
            pool.emplace_back([&, w, begin, end] {
                try {
                    run(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // sequential reduction keeps the result independent of the thread count
    double sum = 0.0;
    for (const auto& o : outcomes) {
        sum += o.cost;
        report.longest_segment = std::max(report.longest_segment, o.longest_segment);
    }
    const double n = static_cast<double>(options.paths);
    report.mean_discounted_cost = sum / n;
    double sq = 0.0;
    for (const auto& o : outcomes) sq += (o.cost - report.mean_discounted_cost) * (o.cost - report.mean_discounted_cost);
    report.std_error = options.paths > 1 ? std::sqrt(sq / (n - 1.0) / n) : 0.0;
    return report;
}

}  // namespace resetinv
