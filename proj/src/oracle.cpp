#include "tzopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "tzopt/market_model.hpp"
#include "tzopt/rng.hpp"
#include "tzopt/signals.hpp"

namespace tzopt {

namespace {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            carry_ += (sum_ - t) + v;
        } else {
            carry_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

void require_rates(const DiscreteProblem& problem, std::span<const double> rates) {
    if (rates.size() < problem.n_steps) {
        throw std::invalid_argument("plan has fewer rates than the problem has steps");
    }
}

} // namespace

void DiscreteProblem::validate() const {
    costs.validate();
    if (n_steps < 2) {
        throw std::invalid_argument("discrete problem needs n_steps >= 2");
    }
    if (drift.size() != n_steps) {
        throw std::invalid_argument("drift must have exactly n_steps entries, got " +
                                    std::to_string(drift.size()) + " for " + std::to_string(n_steps));
    }
    if (!(delta > 0.0)) {
        throw std::invalid_argument("discrete problem needs delta > 0");
    }
}

DiscreteProblem make_discrete_problem(const CostParams& costs, std::vector<double> drift) {
    DiscreteProblem problem;
    problem.n_steps = drift.size();
    problem.delta = costs.horizon / static_cast<double>(problem.n_steps);
    problem.drift = std::move(drift);
    problem.costs = costs;
    problem.validate();
    return problem;
}

DiscreteProblem constant_drift_problem(const CostParams& costs, std::size_t n_steps, double drift_rate) {
    const double delta = costs.horizon / static_cast<double>(n_steps);
    return make_discrete_problem(costs, std::vector<double>(n_steps, drift_rate * delta));
}

double discrete_objective(const DiscreteProblem& problem, std::span<const double> rates) {
    problem.validate();
    require_rates(problem, rates);
    const auto& c = problem.costs;
    const double dt = problem.delta;
    CompensatedSum cash;
    CompensatedSum running;
    CompensatedSum price;
    CompensatedSum position;
    position.add(c.x0);
    for (std::size_t i = 0; i < problem.n_steps; ++i) {
        const double u = rates[i];
        const double x = position.value();
        cash.add((price.value() - c.lambda * u) * u * dt);
        running.add(c.gamma * x * x * dt);
        position.add(-u * dt);
        price.add(problem.drift[i]);
    }
    const double x_end = position.value();
    CompensatedSum total;
    total.add(cash.value());
    total.add(price.value() * x_end);
    total.add(-running.value());
    total.add(-c.big_gamma * x_end * x_end);
    return total.value();
}

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n || n == 0) {
        throw std::invalid_argument("tridiagonal system dimension mismatch");
    }
    std::vector<double> c_prime(n);
    std::vector<double> d_prime(n);
    c_prime[0] = upper[0] / diag[0];
    d_prime[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double denom = diag[i] - lower[i] * c_prime[i - 1];
        if (!(std::abs(denom) > 0.0)) {
            throw std::runtime_error("tridiagonal elimination hit a zero pivot");
        }
        c_prime[i] = (i + 1 < n) ? upper[i] / denom : 0.0;
        d_prime[i] = (rhs[i] - lower[i] * d_prime[i - 1]) / denom;
    }
    std::vector<double> x(n);
    x[n - 1] = d_prime[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    return x;
}

TradePlan solve_discrete(const DiscreteProblem& problem) {
    problem.validate();
    const auto& c = problem.costs;
    const std::size_t n = problem.n_steps;
    const double dt = problem.delta;
    const double coupling = 2.0 * c.lambda / dt;

    // Unknowns X_1..X_N. Interior rows: coupling (2 X_k - X_{k-1} - X_{k+1})
    // + 2 gamma dt X_k = drift_{k-1}; last row: coupling (X_N - X_{N-1})
    // + 2 Gamma X_N = drift_{N-1}.
    std::vector<double> lower(n, -coupling);
    std::vector<double> upper(n, -coupling);
    std::vector<double> diag(n, 2.0 * coupling + 2.0 * c.gamma * dt);
    std::vector<double> rhs(problem.drift.begin(), problem.drift.end());
    diag[n - 1] = coupling + 2.0 * c.big_gamma;
    rhs[0] += coupling * c.x0;
    const auto interior = solve_tridiagonal(lower, diag, upper, rhs);

    TradePlan plan;
    plan.grid = uniform_grid(c.horizon, n);
    plan.positions.resize(n + 1);
    plan.positions[0] = c.x0;
    std::copy(interior.begin(), interior.end(), plan.positions.begin() + 1);
    plan.rates.resize(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        plan.rates[i] = (plan.positions[i] - plan.positions[i + 1]) / dt;
    }
    plan.rates[n] = c.big_gamma / c.lambda * plan.positions[n];
    return plan;
}

TradePlan solve_discrete_dense(const DiscreteProblem& problem) {
    problem.validate();
    const auto& c = problem.costs;
    const std::size_t n = problem.n_steps;
    if (n > 4096) {
        throw std::invalid_argument("dense discrete solve is limited to 4096 steps");
    }
    const double dt = problem.delta;
    const auto nn = static_cast<Eigen::Index>(n);

    // -Hessian of the objective in the rate vector and the gradient at u = 0.
    std::vector<double> price(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        price[i + 1] = price[i] + problem.drift[i];
    }
    Eigen::MatrixXd hessian(nn, nn);
    Eigen::VectorXd gradient(nn);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
            const auto later = static_cast<double>(n - 1 - std::max(j, l));
            hessian(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) =
                (j == l ? 2.0 * c.lambda * dt : 0.0) + 2.0 * c.gamma * dt * dt * dt * later +
                2.0 * c.big_gamma * dt * dt;
        }
        gradient(static_cast<Eigen::Index>(j)) =
            (price[j] - price[n]) * dt + 2.0 * c.gamma * dt * dt * static_cast<double>(n - 1 - j) * c.x0 +
            2.0 * c.big_gamma * dt * c.x0;
    }
    const Eigen::LLT<Eigen::MatrixXd> factor(hessian);
    if (factor.info() != Eigen::Success) {
        throw std::runtime_error("Cholesky factorization of the discrete Hessian failed");
    }
    const Eigen::VectorXd rates = factor.solve(gradient);

    TradePlan plan;
    plan.grid = uniform_grid(c.horizon, n);
    plan.positions.resize(n + 1);
    plan.rates.resize(n + 1);
    plan.positions[0] = c.x0;
    for (std::size_t i = 0; i < n; ++i) {
        plan.rates[i] = rates(static_cast<Eigen::Index>(i));
        plan.positions[i + 1] = plan.positions[i] - plan.rates[i] * dt;
    }
    plan.rates[n] = c.big_gamma / c.lambda * plan.positions[n];
    return plan;
}

ProbeReport concavity_probe(const DiscreteProblem& problem, const TradePlan& plan,
                            std::size_t n_directions, std::uint64_t seed) {
    problem.validate();
    require_rates(problem, plan.rates);
    const std::size_t n = problem.n_steps;
    const std::vector<double> base(plan.rates.begin(), plan.rates.begin() + static_cast<std::ptrdiff_t>(n));

    double rms = 0.0;
    for (double u : base) {
        rms += u * u;
    }
    rms = std::sqrt(rms / static_cast<double>(n));
    const double step = 1e-2 * std::max(1.0, rms);

    const double f0 = discrete_objective(problem, base);
    const double tolerance = 1e-12 * std::max(1.0, std::abs(f0));

    ProbeReport report;
    report.directions = n_directions;
    std::vector<double> direction(n);
    std::vector<double> trial(n);
    const auto along = [&](double s) {
        for (std::size_t i = 0; i < n; ++i) {
            trial[i] = base[i] + s * direction[i];
        }
        return discrete_objective(problem, trial);
    };

    for (std::size_t d = 0; d < n_directions; ++d) {
        NormalStream stream(seed, d, kProbeStreamTag);
        double norm = 0.0;
        for (auto& v : direction) {
            v = stream.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm / static_cast<double>(n));
        for (auto& v : direction) {
            v /= norm;
        }

        const double f_plus = along(step);
        const double f_minus = along(-step);
        const double f_double = along(2.0 * step);
        const double slope = (f_plus - f_minus) / (2.0 * step);
        const double curvature = (f_plus - 2.0 * f0 + f_minus) / (2.0 * step * step);
        const double predicted = f0 + 2.0 * step * slope + 4.0 * step * step * curvature;
        const double scale = std::max({std::abs(f_double), std::abs(f0), 1e-300});
        report.max_quadratic_residual =
            std::max(report.max_quadratic_residual, std::abs(predicted - f_double) / scale);

        double gain = std::max(f_plus, f_minus) - f0;
        if (curvature < 0.0) {
            gain = std::max(gain, along(-slope / (2.0 * curvature)) - f0);
        }
        report.max_line_gain = std::max(report.max_line_gain, gain);
        if (curvature >= 0.0 || gain > tolerance) {
            ++report.ascent_directions;
        }
    }
    return report;
}

OracleComparison compare_with_closed_form(const CostParams& costs, const SampledCurve& drift_rate,
                                          std::span<const std::size_t> resolutions) {
    costs.validate();
    if (resolutions.size() < 2) {
        throw std::invalid_argument("comparison needs at least two resolutions");
    }
    const GKernel kernel(costs);
    const MarketModel model = DeterministicDrift{drift_rate, 0.0};
    const double scale = costs.x0 != 0.0 ? std::abs(costs.x0) : 1.0;

    OracleComparison result;
    for (std::size_t n : resolutions) {
        const auto grid = uniform_grid(costs.horizon, n);
        SampledCurve v1{grid, std::vector<double>(grid.size())};
        for (std::size_t i = 0; i < grid.size(); ++i) {
            v1.values[i] = v1_target_zone(kernel, costs, model, TargetZoneState{grid[i], 0.0, 0.0});
        }
        const auto continuous = trajectory_from_signal(kernel, costs.x0, v1, grid);
        const auto discrete = solve_discrete(make_discrete_problem(costs, drift_increments(drift_rate, grid)));

        ResolutionCheck check;
        check.n_steps = n;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            check.trajectory_error = std::max(
                check.trajectory_error, std::abs(discrete.positions[i] - continuous.positions[i]) / scale);
        }
        const double u0 = optimal_rate(kernel, 0.0, costs.x0, v1.values[0]);
        check.initial_rate_error = std::abs(discrete.rates[0] - u0) / std::abs(u0);
        check.terminal_residual =
            discrete.rates[n - 1] - costs.big_gamma / costs.lambda * discrete.positions[n];
        result.checks.push_back(check);
    }

    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& c : result.checks) {
        mean_x += std::log(costs.horizon / static_cast<double>(c.n_steps));
        mean_y += std::log(c.trajectory_error);
    }
    const auto count = static_cast<double>(result.checks.size());
    mean_x /= count;
    mean_y /= count;
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& c : result.checks) {
        const double dx = std::log(costs.horizon / static_cast<double>(c.n_steps)) - mean_x;
        sxy += dx * (std::log(c.trajectory_error) - mean_y);
        sxx += dx * dx;
    }
    result.trajectory_order = sxy / sxx;

    const auto& coarse = result.checks[result.checks.size() - 2];
    const auto& fine = result.checks.back();
    const double dt_coarse = costs.horizon / static_cast<double>(coarse.n_steps);
    const double dt_fine = costs.horizon / static_cast<double>(fine.n_steps);
    result.extrapolated_terminal_residual =
        (dt_coarse * fine.terminal_residual - dt_fine * coarse.terminal_residual) / (dt_coarse - dt_fine);
    return result;
}

} // namespace tzopt
