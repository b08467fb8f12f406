#include "resetinv/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace resetinv {

Grid::Grid(double c_max, std::size_t n) : c_max_(c_max), n_(n) {
    if (!(c_max > 0.0) || !std::isfinite(c_max)) throw std::invalid_argument("grid: c_max must be positive");
    if (n < 2) throw std::invalid_argument("grid: need at least 2 knots");
    step_ = c_max / static_cast<double>(n - 1);
}

double Grid::knot(std::size_t i) const {
    if (i + 1 == n_) return c_max_;
    return static_cast<double>(i) * step_;
}

TabulatedFunction::TabulatedFunction(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("tabulated function: one value per knot");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("tabulated function: values must be finite");
}

double TabulatedFunction::operator()(double x) const {
    const double tol = 1e-12 * grid_.c_max();
    if (!(x >= -tol && x <= grid_.c_max() + tol))
        throw std::out_of_range("tabulated function evaluated outside [0, c_max]");
    const double pos = std::clamp(x, 0.0, grid_.c_max()) / grid_.step();
    const std::size_t last = grid_.size() - 1;
    const auto i = std::min(static_cast<std::size_t>(pos), last - 1);
    const double frac = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

double TabulatedFunction::max_abs_slope() const {
    double slope = 0.0;
    for (std::size_t i = 0; i + 1 < values_.size(); ++i)
        slope = std::max(slope, std::abs(values_[i + 1] - values_[i]) / grid_.step());
    return slope;
}

namespace {

// Weights of the endpoint values of a function linear in w on [a, b]:
// integral over [a, b] of f(w) * ((b - w) / (b - a), (w - a) / (b - a)).
struct SegmentWeights {
    double left;
    double right;
};

SegmentWeights segment_weights(const DemandModel& d, double a, double b, const QuadratureOptions& quadrature,
                               std::size_t panels) {
    const double width = b - a;
    if (!(width > 0.0)) return {0.0, 0.0};
    if (quadrature.rule == QuadratureRule::exact) {
        const double mass = d.survival(a) - d.survival(b);
        const double first = d.partial_mean(b) - d.partial_mean(a);
        const double right = std::clamp((first - a * mass) / width, 0.0, std::max(mass, 0.0));
        return {std::max(mass, 0.0) - right, right};
    }
    const double h = width / static_cast<double>(panels);
    double left = 0.0;
    double right = 0.0;
    for (std::size_t j = 0; j <= panels; ++j) {
        const double frac = static_cast<double>(j) / static_cast<double>(panels);
        const double w = a + static_cast<double>(j) * h;
        const double weight = (j == 0 || j == panels) ? 0.5 * h : h;
        const double f = d.density(w);
        left += weight * (1.0 - frac) * f;
        right += weight * frac * f;
    }
    return {left, right};
}

std::size_t panels_for(double width, double c_max, const QuadratureOptions& quadrature) {
    if (quadrature.mesh_points < 2) throw std::invalid_argument("quadrature mesh needs at least 2 points");
    const double share = static_cast<double>(quadrature.mesh_points - 1) * width / c_max;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(share - 1e-9)));
}

}  // namespace

double expected_continuation(const TabulatedFunction& next, const DemandModel& demand, double z,
                             const QuadratureOptions& quadrature) {
    const Grid& grid = next.grid();
    const double tol = 1e-12 * grid.c_max();
    if (!(z >= -tol && z <= grid.c_max() + tol))
        throw std::out_of_range("expected_continuation: z outside [0, c_max]");
    z = std::clamp(z, 0.0, grid.c_max());

    // knots at or below z; snapping keeps z on a knot when it was meant to be
    auto top = static_cast<std::size_t>(std::floor(z / grid.step() + 1e-9));
    top = std::min(top, grid.size() - 1);
    if (grid.knot(top) > z) z = grid.knot(top);

    double total = 0.0;
    double interior_mass = 0.0;
    auto add_segment = [&](double a, double b, double value_a, double value_b) {
        const auto w = segment_weights(demand, a, b, quadrature, panels_for(b - a, grid.c_max(), quadrature));
        total += w.left * value_a + w.right * value_b;
        interior_mass += w.left + w.right;
    };

    const double head = z - grid.knot(top);
    if (head > tol) add_segment(0.0, head, next(z), next.at_knot(top));
    for (std::size_t j = top; j > 0; --j)
        add_segment(z - grid.knot(j), z - grid.knot(j - 1), next.at_knot(j), next.at_knot(j - 1));

    const double tail = quadrature.rule == QuadratureRule::exact ? demand.survival(z) : 1.0 - interior_mass;
    return total + tail * next.at_knot(0);
}

ContinuationKernel::ContinuationKernel(const Grid& grid, const DemandModel& demand,
                                       const QuadratureOptions& quadrature) {
    const std::size_t n = grid.size();
    const std::size_t panels = panels_for(grid.step(), grid.c_max(), quadrature);
    near_.resize(n - 1);
    far_.resize(n - 1);
    for (std::size_t d = 0; d + 1 < n; ++d) {
        const auto w = segment_weights(demand, grid.knot(d), grid.knot(d + 1), quadrature, panels);
        near_[d] = w.left;
        far_[d] = w.right;
    }
    tail_.resize(n);
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tail_[i] = quadrature.rule == QuadratureRule::exact ? demand.survival(grid.knot(i)) : 1.0 - mass;
        if (i + 1 < n) mass += near_[i] + far_[i];
    }
}

double ContinuationKernel::at(std::span<const double> next, std::size_t i) const {
    double total = tail_[i] * next[0];
    for (std::size_t d = 0; d < i; ++d) total += near_[d] * next[i - d] + far_[d] * next[i - d - 1];
    return total;
}

std::vector<double> ContinuationKernel::apply(std::span<const double> next) const {
    if (next.size() != tail_.size()) throw std::invalid_argument("continuation kernel: size mismatch");
    std::vector<double> out(next.size());
    for (std::size_t i = 0; i < next.size(); ++i) out[i] = at(next, i);
    return out;
}

double SweepResult::order_target(std::size_t i, int t) const {
    return grid().knot(target[static_cast<std::size_t>(t)][i]);
}

bool reset_preferred(double reset_value, double no_reset_value) {
    return reset_value <= no_reset_value + 1e-12 * (1.0 + std::abs(no_reset_value));
}

BellmanOperator::BellmanOperator(ProblemSpec spec, SolverOptions options)
    : spec_(std::move(spec)),
      options_(options),
      grid_(spec_.c_max(), options.knots),
      kernel_(grid_, spec_.demand(), options.quadrature) {
    const int k = spec_.k();
    const double c = spec_.costs().unit_order;
    stage_.resize(static_cast<std::size_t>(k));
    reset_.resize(static_cast<std::size_t>(k) + 1);
    for (int t = 0; t <= k; ++t) {
        auto& reset_row = reset_[static_cast<std::size_t>(t)];
        reset_row.resize(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) reset_row[i] = expected_reset_cost(spec_, grid_.knot(i), t);
        if (t == k) continue;
        auto& stage = stage_[static_cast<std::size_t>(t)];
        stage.resize(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const double z = grid_.knot(i);
            stage[i] = c * z + expected_stage_cost(spec_, z, t);
        }
    }
}

std::span<const double> BellmanOperator::stage_row(int t) const { return stage_.at(static_cast<std::size_t>(t)); }

std::span<const double> BellmanOperator::reset_row(int t) const { return reset_.at(static_cast<std::size_t>(t)); }

std::vector<double> BellmanOperator::g_row(std::span<const double> next, int t) const {
    std::vector<double> g = kernel_.apply(next);
    const auto stage = stage_row(t);
    const double gamma = spec_.gamma();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = stage[i] + gamma * g[i];
    return g;
}

OrderChoice BellmanOperator::best_order(std::span<const double> g, std::size_t i) const {
    const double K = spec_.costs().fixed_order;
    OrderChoice best{g[i], i};
    for (std::size_t j = i + 1; j < g.size(); ++j) {
        const double value = g[j] + K;
        if (value < best.value) best = {value, j};
    }
    best.value -= spec_.costs().unit_order * grid_.knot(i);
    return best;
}

SweepResult BellmanOperator::sweep(double v) const {
    const int k = spec_.k();
    const std::size_t n = grid_.size();
    const double c = spec_.costs().unit_order;
    const double K = spec_.costs().fixed_order;
    const auto rows = static_cast<std::size_t>(k) + 1;

    SweepResult out;
    out.v = v;
    out.reset.assign(rows, std::vector<std::uint8_t>(n, 1));
    out.target.assign(rows, std::vector<std::size_t>(n));
    out.g.resize(static_cast<std::size_t>(k));
    std::vector<std::vector<double>> values(rows, std::vector<double>(n));

    const auto terminal_reset = reset_row(k);
    for (std::size_t i = 0; i < n; ++i) {
        values[rows - 1][i] = v + terminal_reset[i];
        out.target[rows - 1][i] = i;
    }

    std::vector<double> suffix_value(n + 1);
    std::vector<std::size_t> suffix_index(n + 1);
    for (int t = k - 1; t >= 0; --t) {
        const auto row = static_cast<std::size_t>(t);
        std::vector<double> g = g_row(values[row + 1], t);

        suffix_value[n] = std::numeric_limits<double>::infinity();
        suffix_index[n] = n;
        for (std::size_t j = n; j-- > 0;) {
            // <= keeps the smallest argmin on ties
            if (g[j] <= suffix_value[j + 1]) {
                suffix_value[j] = g[j];
                suffix_index[j] = j;
            } else {
                suffix_value[j] = suffix_value[j + 1];
                suffix_index[j] = suffix_index[j + 1];
            }
        }

        const auto resets = reset_row(t);
        for (std::size_t i = 0; i < n; ++i) {
            double no_reset = g[i];
            std::size_t target = i;
            if (K + suffix_value[i + 1] < g[i]) {
                no_reset = K + suffix_value[i + 1];
                target = suffix_index[i + 1];
            }
            no_reset -= c * grid_.knot(i);
            const double with_reset = v + resets[i];
            out.target[row][i] = target;
            if (reset_preferred(with_reset, no_reset)) {
                values[row][i] = with_reset;
                out.reset[row][i] = 1;
            } else {
                values[row][i] = no_reset;
                out.reset[row][i] = 0;
            }
        }
        out.g[row] = std::move(g);
    }

    out.values.reserve(rows);
    for (auto& row : values) out.values.emplace_back(grid_, std::move(row));
    return out;
}

ResetStateValue BellmanOperator::reset_state_value(const SweepResult& sweep) const {
    const OrderChoice choice = best_order(sweep.g.front(), 0);
    return {choice.value, choice.target, grid_.knot(choice.target)};
}

ResetStateValue BellmanOperator::reset_state_value(std::span<const double> next_row1) const {
    const std::vector<double> g = g_row(next_row1, 0);
    const OrderChoice choice = best_order(g, 0);
    return {choice.value, choice.target, grid_.knot(choice.target)};
}

double g_value(const ProblemSpec& spec, const TabulatedFunction& next, double z, int t,
               const QuadratureOptions& quadrature) {
    return spec.costs().unit_order * z + expected_stage_cost(spec, z, t) +
           spec.gamma() * expected_continuation(next, spec.demand(), z, quadrature);
}

SweepResult sweep(const ProblemSpec& spec, double v, const SolverOptions& options) {
    return BellmanOperator(spec, options).sweep(v);
}

}  // namespace resetinv
