#include "tzopt/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "tzopt/parallel.hpp"

namespace tzopt {

namespace {

template <class Record>
GoalBreakdown execute(const PathSample& path, const Policy& policy, const CostParams& costs,
                      std::span<const double> signal, Record&& record) {
    const std::size_t n = path.grid.size() - 1;
    GoalBreakdown goal;
    double x = costs.x0;
    PolicyState state;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = path.grid[i + 1] - path.grid[i];
        state.step = i;
        state.t = path.grid[i];
        state.x = x;
        state.m = path.m[i];
        state.m_star = path.m_star[i];
        state.p = path.p[i];
        state.signal = signal.empty() ? 0.0 : signal[i];
        const double u = policy(state);
        record(i, x, u);
        goal.cash += (path.p[i] - costs.lambda * u) * u * dt;
        goal.running_penalty += costs.gamma * x * x * dt;
        x -= u * dt;
    }
    record(n, x, costs.big_gamma / costs.lambda * x);
    goal.terminal_asset = path.p[n] * x;
    goal.terminal_penalty = costs.big_gamma * x * x;
    goal.total = goal.cash + goal.terminal_asset - goal.running_penalty - goal.terminal_penalty;
    return goal;
}

/// Runs every policy along one path, interleaved step by step. Each policy
/// sees exactly the arithmetic of `execute`, so totals match it bit for bit.
void execute_all(const PathSample& path, std::span<const Policy> policies, const CostParams& costs,
                 std::span<const double> signal, std::vector<GoalBreakdown>& goals,
                 std::vector<double>& positions) {
    const std::size_t n = path.grid.size() - 1;
    const std::size_t count = policies.size();
    goals.assign(count, GoalBreakdown{});
    positions.assign(count, costs.x0);
    PolicyState state;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = path.grid[i + 1] - path.grid[i];
        state.step = i;
        state.t = path.grid[i];
        state.m = path.m[i];
        state.m_star = path.m_star[i];
        state.p = path.p[i];
        state.signal = signal.empty() ? 0.0 : signal[i];
        for (std::size_t k = 0; k < count; ++k) {
            const double x = positions[k];
            state.x = x;
            const double u = policies[k](state);
            goals[k].cash += (path.p[i] - costs.lambda * u) * u * dt;
            goals[k].running_penalty += costs.gamma * x * x * dt;
            positions[k] = x - u * dt;
        }
    }
    for (std::size_t k = 0; k < count; ++k) {
        auto& goal = goals[k];
        const double x = positions[k];
        goal.terminal_asset = path.p[n] * x;
        goal.terminal_penalty = costs.big_gamma * x * x;
        goal.total = goal.cash + goal.terminal_asset - goal.running_penalty - goal.terminal_penalty;
    }
}

void fill_signal(const SignalFn& signal, const PathSample& path, std::vector<double>& out) {
    const std::size_t n = path.grid.size() - 1;
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = signal(path.grid[i], path.m[i], path.p[i]);
    }
}

void require_setup(const MonteCarloSetup& setup) {
    validate(setup.model);
    setup.costs.validate();
    if (setup.n_paths < 2) {
        throw std::invalid_argument("Monte Carlo needs at least 2 paths");
    }
    if (setup.n_steps < 1) {
        throw std::invalid_argument("Monte Carlo needs at least 1 step");
    }
}

std::vector<double> urgency_schedule(const GKernel& kernel, std::size_t n_steps) {
    const auto grid = uniform_grid(kernel.horizon(), n_steps);
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out[i] = urgency(kernel, grid[i]);
    }
    return out;
}

} // namespace

void simulate_path_into(const MarketModel& model, double horizon, std::size_t n_steps,
                        NormalStream& stream, PathSample& path) {
    if (n_steps < 1) {
        throw std::invalid_argument("simulate_path needs n_steps >= 1");
    }
    const std::size_t points = n_steps + 1;
    if (path.grid.size() != points || path.grid.back() != horizon) {
        path.grid = uniform_grid(horizon, n_steps);
    }
    path.m.resize(points);
    path.m_star.resize(points);
    path.p.resize(points);
    const double dt = horizon / static_cast<double>(n_steps);
    const double root_dt = std::sqrt(dt);

    const auto cap = [&](double p_bar) {
        for (std::size_t i = 0; i < points; ++i) {
            const double push = std::max(path.m_star[i] - p_bar, 0.0);
            path.p[i] = std::min(path.m[i] - push, p_bar);
        }
    };
    const auto running_max = [&] {
        double best = path.m[0];
        for (std::size_t i = 0; i < points; ++i) {
            best = std::max(best, path.m[i]);
            path.m_star[i] = best;
        }
    };

    if (const auto* bach = std::get_if<CappedBachelier>(&model)) {
        const double step = bach->sigma * root_dt;
        path.m[0] = bach->m0;
        for (std::size_t i = 1; i < points; ++i) {
            path.m[i] = path.m[i - 1] + step * stream.normal();
        }
        running_max();
        cap(bach->p_bar);
    } else if (const auto* bs = std::get_if<CappedBlackScholes>(&model)) {
        const double vol = bs->sigma * root_dt;
        const double drift = -0.5 * bs->sigma * bs->sigma * dt;
        path.m[0] = bs->m0;
        for (std::size_t i = 1; i < points; ++i) {
            path.m[i] = path.m[i - 1] * std::exp(vol * stream.normal() + drift);
        }
        running_max();
        cap(bs->p_bar);
    } else if (const auto* mart = std::get_if<Martingale>(&model)) {
        const double step = mart->sigma * root_dt;
        path.m[0] = mart->p0;
        for (std::size_t i = 1; i < points; ++i) {
            path.m[i] = path.m[i - 1] + step * stream.normal();
        }
        running_max();
        std::copy(path.m.begin(), path.m.end(), path.p.begin());
    } else {
        const auto& drift = std::get<DeterministicDrift>(model);
        const auto increments = drift_increments(drift.drift, path.grid);
        path.m[0] = drift.p0;
        for (std::size_t i = 1; i < points; ++i) {
            path.m[i] = path.m[i - 1] + increments[i - 1];
        }
        running_max();
        std::copy(path.m.begin(), path.m.end(), path.p.begin());
    }
}

PathSample simulate_path(const MarketModel& model, double horizon, std::size_t n_steps,
                         NormalStream& stream) {
    PathSample path;
    simulate_path_into(model, horizon, n_steps, stream, path);
    return path;
}

std::pair<TradePlan, GoalBreakdown> run_strategy(const PathSample& path, const Policy& policy,
                                                 const CostParams& costs,
                                                 std::span<const double> signal) {
    if (path.grid.size() < 2) {
        throw std::invalid_argument("run_strategy needs a path with at least one step");
    }
    if (!signal.empty() && signal.size() + 1 < path.grid.size()) {
        throw std::invalid_argument("signal must cover every decision point of the path");
    }
    TradePlan plan;
    plan.grid = path.grid;
    plan.positions.resize(path.grid.size());
    plan.rates.resize(path.grid.size());
    const auto goal = execute(path, policy, costs, signal, [&](std::size_t i, double x, double u) {
        plan.positions[i] = x;
        plan.rates[i] = u;
    });
    return {std::move(plan), goal};
}

std::vector<std::vector<double>> simulate_totals(const MonteCarloSetup& setup,
                                                 std::span<const Policy> policies,
                                                 const SignalFn& signal) {
    require_setup(setup);
    std::vector<std::vector<double>> totals(policies.size(), std::vector<double>(setup.n_paths));
    parallel_blocks(setup.n_paths, setup.workers, [&](std::size_t begin, std::size_t end) {
        PathSample path;
        std::vector<double> path_signal;
        std::vector<GoalBreakdown> goals;
        std::vector<double> positions;
        for (std::size_t j = begin; j < end; ++j) {
            NormalStream stream(setup.seed, j, kPriceStreamTag);
            simulate_path_into(setup.model, setup.costs.horizon, setup.n_steps, stream, path);
            if (signal) {
                fill_signal(signal, path, path_signal);
            } else {
                path_signal.clear();
            }
            execute_all(path, policies, setup.costs, path_signal, goals, positions);
            for (std::size_t k = 0; k < policies.size(); ++k) {
                totals[k][j] = goals[k].total;
            }
        }
    });
    return totals;
}

MCEstimate summarize(std::span<const double> samples, std::uint64_t seed) {
    if (samples.size() < 2) {
        throw std::invalid_argument("summarize needs at least 2 samples");
    }
    const auto n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double s : samples) {
        sum += s;
    }
    const double mean = sum / n;
    double squares = 0.0;
    for (double s : samples) {
        squares += (s - mean) * (s - mean);
    }
    return {mean, std::sqrt(squares / (n - 1.0) / n), samples.size(), seed};
}

MCEstimate summarize_difference(std::span<const double> a, std::span<const double> b,
                                std::uint64_t seed) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("paired samples must have equal length");
    }
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff[i] = a[i] - b[i];
    }
    return summarize(diff, seed);
}

MCEstimate estimate_value(const MonteCarloSetup& setup, const Policy& policy, const SignalFn& signal) {
    const Policy policies[] = {policy};
    const auto totals = simulate_totals(setup, policies, signal);
    return summarize(totals.front(), setup.seed);
}

MCEstimate estimate_v0(const MonteCarloSetup& setup, const SignalFn& signal) {
    require_setup(setup);
    if (!signal) {
        throw std::invalid_argument("estimate_v0 needs a signal");
    }
    std::vector<double> energy(setup.n_paths);
    parallel_blocks(setup.n_paths, setup.workers, [&](std::size_t begin, std::size_t end) {
        PathSample path;
        std::vector<double> path_signal;
        for (std::size_t j = begin; j < end; ++j) {
            NormalStream stream(setup.seed, j, kSignalEnergyStreamTag);
            simulate_path_into(setup.model, setup.costs.horizon, setup.n_steps, stream, path);
            fill_signal(signal, path, path_signal);
            double total = 0.0;
            for (std::size_t i = 0; i < path_signal.size(); ++i) {
                total += path_signal[i] * path_signal[i] * (path.grid[i + 1] - path.grid[i]);
            }
            energy[j] = total;
        }
    });
    return summarize(energy, setup.seed);
}

MCEstimate estimate_v0(const MonteCarloSetup& setup, const GKernel& kernel) {
    return estimate_v0(setup, tabulated_signal(kernel, setup.costs, setup.model, setup.workers));
}

Policy almgren_chriss_policy(const GKernel& kernel, std::size_t n_steps) {
    auto schedule = std::make_shared<const std::vector<double>>(urgency_schedule(kernel, n_steps));
    return [schedule](const PolicyState& s) { return (*schedule)[s.step] * s.x; };
}

Policy optimal_policy(const GKernel& kernel, std::size_t n_steps) {
    auto schedule = std::make_shared<const std::vector<double>>(urgency_schedule(kernel, n_steps));
    return [schedule](const PolicyState& s) { return (*schedule)[s.step] * s.x - s.signal; };
}

SignalFn tabulated_signal(const GKernel& kernel, const CostParams& costs, const MarketModel& model,
                          unsigned workers) {
    auto table = std::make_shared<const TabulatedSignal>(kernel, costs, model, TableResolution{}, workers);
    return [table](double t, double m, double p) { return (*table)(t, m, p); };
}

} // namespace tzopt
