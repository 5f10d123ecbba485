#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "tzopt/market_model.hpp"
#include "tzopt/rng.hpp"
#include "tzopt/schedule.hpp"
#include "tzopt/signals.hpp"

namespace tzopt {

/// One simulated path on the uniform grid 0 = t_0 < ... < t_N = T.
/// p = m - (m_star - p_bar)^+ for capped models; p = m otherwise.
struct PathSample {
    std::vector<double> grid;
    std::vector<double> m;
    std::vector<double> m_star;
    std::vector<double> p;
};

/// Realized terms of the goal functional on one path.
struct GoalBreakdown {
    double cash = 0.0;              // sum (P - lambda u) u dt
    double terminal_asset = 0.0;    // P_T X_T
    double running_penalty = 0.0;   // sum gamma X^2 dt
    double terminal_penalty = 0.0;  // Gamma X_T^2
    double total = 0.0;
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

/// What a policy may observe at grid step `step` before choosing its rate.
/// `signal` is v1 at this state when the simulation carries a signal, else 0.
struct PolicyState {
    std::size_t step = 0;
    double t = 0.0;
    double x = 0.0;
    double m = 0.0;
    double m_star = 0.0;
    double p = 0.0;
    double signal = 0.0;
};

using Policy = std::function<double(const PolicyState&)>;

/// v1(t, m, p); the general signal interface consumed by the simulator.
using SignalFn = std::function<double(double t, double m, double p)>;

struct MonteCarloSetup {
    MarketModel model;
    CostParams costs;
    std::size_t n_paths = 100000;
    std::size_t n_steps = 4096;
    std::uint64_t seed = 1;
    unsigned workers = 1;  // 0: one per hardware thread
};

/// Simulates one path. Bachelier and martingale increments are exact Gaussian
/// steps, Black-Scholes uses the exact log-normal step; the running maximum is
/// taken over grid points only.
PathSample simulate_path(const MarketModel& model, double horizon, std::size_t n_steps,
                         NormalStream& stream);

/// In-place variant reusing the buffers of `path`.
void simulate_path_into(const MarketModel& model, double horizon, std::size_t n_steps,
                        NormalStream& stream, PathSample& path);

/// Executes `policy` along `path` with the forward-Euler position update and
/// left-endpoint Riemann sums for every integral of the goal functional.
/// `signal`, when nonempty, holds v1 at grid points 0..N-1.
std::pair<TradePlan, GoalBreakdown> run_strategy(const PathSample& path, const Policy& policy,
                                                 const CostParams& costs,
                                                 std::span<const double> signal = {});

/// Realized totals of every policy on the same paths (common random numbers):
/// result[k][j] is policy k on path j. Path j uses NormalStream(seed, j).
std::vector<std::vector<double>> simulate_totals(const MonteCarloSetup& setup,
                                                 std::span<const Policy> policies,
                                                 const SignalFn& signal = {});

/// Sample mean and standard error, summed in index order.
MCEstimate summarize(std::span<const double> samples, std::uint64_t seed);

/// Estimate of E[a - b] from paired samples.
MCEstimate summarize_difference(std::span<const double> a, std::span<const double> b,
                                std::uint64_t seed);

MCEstimate estimate_value(const MonteCarloSetup& setup, const Policy& policy,
                          const SignalFn& signal = {});

/// Monte Carlo v0(0) = E[int_0^T v1(s)^2 ds] (left Riemann sum per path).
/// Draws from the kSignalEnergyStreamTag streams, so it is independent of
/// estimate_value under the same seed.
MCEstimate estimate_v0(const MonteCarloSetup& setup, const SignalFn& signal);

/// Same, with the interpolated target-zone signal of the setup's model.
MCEstimate estimate_v0(const MonteCarloSetup& setup, const GKernel& kernel);

/// urgency(t_i) x, precomputed on the N-step grid.
Policy almgren_chriss_policy(const GKernel& kernel, std::size_t n_steps);

/// urgency(t_i) x - v1, the feedback law with the simulation's signal.
Policy optimal_policy(const GKernel& kernel, std::size_t n_steps);

/// Shares a TabulatedSignal for the model as a SignalFn.
SignalFn tabulated_signal(const GKernel& kernel, const CostParams& costs, const MarketModel& model,
                          unsigned workers = 1);

} // namespace tzopt
