#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tzopt/schedule.hpp"

namespace tzopt {

/// Discrete-time deterministic version of the goal functional: N equal steps,
/// per-step price increments `drift` (P_0 = 0), rates held constant on each
/// step, forward-Euler positions and left-endpoint Riemann sums.
struct DiscreteProblem {
    std::size_t n_steps = 0;
    double delta = 0.0;
    std::vector<double> drift;
    CostParams costs;

    void validate() const;
};

DiscreteProblem make_discrete_problem(const CostParams& costs, std::vector<double> drift);

/// Problem with a constant drift rate (price change per unit time).
DiscreteProblem constant_drift_problem(const CostParams& costs, std::size_t n_steps, double drift_rate);

/// Discrete objective at the given N rates, with compensated summation.
double discrete_objective(const DiscreteProblem& problem, std::span<const double> rates);

/// Solves a tridiagonal system in place (Thomas algorithm, no pivoting).
/// `lower[i]` couples row i to i - 1 (lower[0] unused), `upper[i]` couples
/// row i to i + 1 (upper[n - 1] unused). Returns the solution.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Exact maximizer of the discrete objective.
///
/// Written in the positions X_1..X_N the objective is a concave quadratic
/// whose first-order conditions form a symmetric positive-definite
/// tridiagonal system; it is solved directly. `rates` has N + 1 entries, the
/// last being the terminal rate (Gamma / lambda) X_N.
TradePlan solve_discrete(const DiscreteProblem& problem);

/// The same maximizer from the dense N x N first-order system in the rate
/// vector, via Cholesky. Intended for cross-checks at n_steps <= 4096.
TradePlan solve_discrete_dense(const DiscreteProblem& problem);

struct ProbeReport {
    std::size_t directions = 0;
    std::size_t ascent_directions = 0;
    double max_line_gain = 0.0;             // best improvement found along any probed line
    double max_quadratic_residual = 0.0;    // relative fourth-point misfit

    [[nodiscard]] bool maximal() const { return ascent_directions == 0; }
};

/// Evaluates the objective along random lines through `plan` (first N rates).
/// Along each line three points fix the parabola, a fourth checks it; a
/// direction counts as ascent when the line optimum improves on the plan by
/// more than 1e-12 max(1, |V|).
ProbeReport concavity_probe(const DiscreteProblem& problem, const TradePlan& plan,
                            std::size_t n_directions, std::uint64_t seed);

struct ResolutionCheck {
    std::size_t n_steps = 0;
    double trajectory_error = 0.0;      // max |X_disc - X_cont| / |x0|
    double initial_rate_error = 0.0;    // |u_0 disc - u(0) cont| / |u(0) cont|
    double terminal_residual = 0.0;     // u_{N-1} - (Gamma / lambda) X_N, discrete
};

struct OracleComparison {
    std::vector<ResolutionCheck> checks;
    double trajectory_order = 0.0;        // least-squares slope of log error vs log dt
    double extrapolated_terminal_residual = 0.0;
};

/// Compares solve_discrete against the closed-form schedule driven by the
/// deterministic-drift signal at each resolution (increasing order).
OracleComparison compare_with_closed_form(const CostParams& costs, const SampledCurve& drift_rate,
                                          std::span<const std::size_t> resolutions);

} // namespace tzopt
