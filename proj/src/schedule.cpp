#include "tzopt/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tzopt {

namespace {

void require_positive(double value, const char* name) {
    if (!std::isfinite(value) || value <= 0.0) {
        throw std::invalid_argument(std::string(name) + " must be finite and > 0, got " +
                                    std::to_string(value));
    }
}

void validate_grid(std::span<const double> grid, double horizon) {
    if (grid.empty()) {
        throw std::invalid_argument("grid is empty");
    }
    if (grid.front() != 0.0) {
        throw std::invalid_argument("grid must start at t = 0");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("grid must be strictly increasing");
        }
    }
    if (grid.back() > horizon * (1.0 + 1e-12)) {
        throw std::invalid_argument("grid runs past the horizon");
    }
}

} // namespace

void CostParams::validate() const {
    require_positive(lambda, "lambda");
    require_positive(gamma, "gamma");
    require_positive(big_gamma, "big_gamma");
    require_positive(horizon, "horizon");
    if (!std::isfinite(x0)) {
        throw std::invalid_argument("x0 must be finite");
    }
}

double CostParams::beta() const { return std::sqrt(gamma / lambda); }

GKernel::GKernel(const CostParams& costs)
    : GKernel((costs.validate(), costs.beta()), costs.big_gamma / costs.lambda, costs.horizon) {}

GKernel::GKernel(double beta, double gamma_ratio, double horizon)
    : beta_(beta), kappa_(gamma_ratio), horizon_(horizon) {
    require_positive(beta_, "beta");
    require_positive(kappa_, "gamma_ratio");
    require_positive(horizon_, "horizon");
}

double GKernel::q(double t) const noexcept { return -std::expm1(-2.0 * beta_ * t) / (2.0 * beta_); }

double GKernel::scaled(double t) const noexcept {
    const double qt = q(t);
    return (1.0 - beta_ * qt) + kappa_ * qt;
}

double SampledCurve::operator()(double t) const {
    if (grid.empty()) {
        return 0.0;
    }
    if (t <= grid.front()) {
        return values.front();
    }
    if (t >= grid.back()) {
        return values.back();
    }
    const auto hi = std::upper_bound(grid.begin(), grid.end(), t);
    const auto j = static_cast<std::size_t>(hi - grid.begin());
    const double w = (t - grid[j - 1]) / (grid[j] - grid[j - 1]);
    return values[j - 1] + w * (values[j] - values[j - 1]);
}

void SampledCurve::validate() const {
    if (grid.empty() || grid.size() != values.size()) {
        throw std::invalid_argument("sampled curve needs matching, nonempty grid and values");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("sampled curve grid must be strictly increasing");
        }
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("sampled curve values must be finite");
        }
    }
}

std::vector<double> uniform_grid(double horizon, std::size_t n_steps) {
    if (n_steps == 0) {
        throw std::invalid_argument("uniform grid needs at least one step");
    }
    std::vector<double> grid(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) {
        grid[i] = horizon * static_cast<double>(i) / static_cast<double>(n_steps);
    }
    grid.back() = horizon;
    return grid;
}

double g_value(const GKernel& kernel, double t) {
    return kernel.beta() * std::exp(kernel.beta() * t) * kernel.scaled(t);
}

double log_g_value(const GKernel& kernel, double t) {
    return std::log(kernel.beta()) + kernel.beta() * t + std::log(kernel.scaled(t));
}

double g_ratio(const GKernel& kernel, double a, double b) {
    return std::exp(kernel.beta() * (a - b)) * (kernel.scaled(a) / kernel.scaled(b));
}

double urgency(const GKernel& kernel, double t) {
    const double tau = std::max(kernel.horizon() - t, 0.0);
    const double beta = kernel.beta();
    const double kappa = kernel.gamma_ratio();
    const double q = kernel.q(tau);
    const double bq = beta * q;
    return (beta * beta * q + kappa * (1.0 - bq)) / ((1.0 - bq) + kappa * q);
}

double ac_position(const GKernel& kernel, double t, double x0) {
    const double horizon = kernel.horizon();
    return g_ratio(kernel, std::max(horizon - t, 0.0), horizon) * x0;
}

double optimal_rate(const GKernel& kernel, double t, double x, double v1_signal) {
    return urgency(kernel, t) * x - v1_signal;
}

TradePlan trajectory_from_signal(const GKernel& kernel, double x0, const SampledCurve& v1_curve,
                                 std::span<const double> grid) {
    const double horizon = kernel.horizon();
    validate_grid(grid, horizon);
    v1_curve.validate();

    // Integration nodes: the plan grid plus every curve knot strictly inside it.
    std::vector<double> nodes(grid.begin(), grid.end());
    for (double s : v1_curve.grid) {
        if (s > grid.front() && s < grid.back()) {
            nodes.push_back(s);
        }
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    TradePlan plan;
    plan.grid.assign(grid.begin(), grid.end());
    plan.positions.reserve(grid.size());
    plan.rates.reserve(grid.size());

    // carried(t_k) = int_0^{t_k} G(T - t_k) / G(T - s) v1(s) ds, advanced one
    // trapezoid panel at a time.
    double carried = 0.0;
    double v1_prev = v1_curve(nodes.front());
    std::size_t next_plan = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double t = nodes[k];
        const double v1_here = v1_curve(t);
        if (k > 0) {
            const double h = t - nodes[k - 1];
            const double rho = g_ratio(kernel, horizon - t, horizon - nodes[k - 1]);
            carried = rho * (carried + 0.5 * h * v1_prev) + 0.5 * h * v1_here;
        }
        v1_prev = v1_here;
        if (next_plan < grid.size() && t == grid[next_plan]) {
            const double x = ac_position(kernel, t, x0) + carried;
            plan.positions.push_back(x);
            plan.rates.push_back(optimal_rate(kernel, t, x, v1_here));
            ++next_plan;
        }
    }
    return plan;
}

double value_formula(const GKernel& kernel, const CostParams& costs, double p0, double v0_0,
                     double v1_0) {
    const double x = costs.x0;
    const double v2_0 = -urgency(kernel, 0.0);
    return p0 * x + costs.lambda * (v0_0 + 2.0 * v1_0 * x + v2_0 * x * x);
}

} // namespace tzopt
