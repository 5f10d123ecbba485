// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "support/reference.hpp"
#include "tzopt/montecarlo.hpp"
#include "tzopt/oracle.hpp"
#include "tzopt/signals.hpp"

using namespace tzopt;

namespace {

// Tolerances and budgets.
constexpr double kFig1RelativeMin = 1e3;
constexpr double kFig1RelativeMax = 1e5;
constexpr double kFarMoneynessFactor = 1e-8;
constexpr double kFig2RelativeMin = 0.30;
constexpr double kShortHorizonTau = 0.01;
constexpr double kShortHorizonMax = 1e-3;
constexpr double kLimitGapMax = 5e-3;
constexpr double kTrajectoryErrorMax = 1e-3;
constexpr double kInitialRateErrorMax = 1e-4;
constexpr double kOrderMin = 0.9;
constexpr double kSeparationSE = 5.0;
constexpr double kProbeSE = 3.0;
constexpr double kValueSE = 3.0;
constexpr double kLookbackRelTol = 1e-8;
constexpr double kThetaSE = 3.0;
constexpr double kRk4Tol = 1e-6;
constexpr double kDigitsTol = 1e-12;

constexpr double kBudgetSurfaceSeconds = 1.0;
constexpr double kBudgetOracleSeconds = 30.0;
constexpr double kBudgetMonteCarloSeconds = 300.0;

constexpr std::size_t kPaths = 100000;
constexpr std::size_t kOptimalitySteps = 1u << 12;
constexpr std::size_t kValueSteps = 1u << 13;
constexpr std::size_t kDirections = 20;
constexpr std::size_t kDirectionKnots = 8;
constexpr double kProbeEpsilon = 0.1;

constexpr double kT = 1.0;
constexpr double kX = 1.0;
constexpr double kLambda = 0.1;
constexpr double kSigma = 0.5;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

CostParams regime(double inventory_cost) {
    CostParams c;
    c.lambda = kLambda;
    c.gamma = inventory_cost;
    c.big_gamma = inventory_cost;
    c.horizon = kT;
    c.x0 = kX;
    return c;
}

const CappedBachelier kFigureModel{1.0, kSigma, 1.0};

TargetZoneState at_distance(double t, double k) { return {t, 1.0 - k, 1.0 - k}; }

double relative_increase(const GKernel& kernel, const CostParams& c, double t, double k) {
    return extra_rate(kernel, c, kFigureModel, at_distance(t, k)) / (urgency(kernel, t) * kX);
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) {
        ++failures;
    }
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

void low_inventory_regime() {
    const auto start = Clock::now();
    const auto c = regime(1e-5);
    const GKernel kernel(c);
    const double corner = relative_increase(kernel, c, 0.0, 0.0);
    const double at_barrier = extra_rate(kernel, c, kFigureModel, at_distance(0.0, 0.0));
    double worst_far = 0.0;
    for (double factor : {10.0, 12.0, 15.0, 20.0}) {
        const double far = extra_rate(kernel, c, kFigureModel, at_distance(0.0, factor * kSigma * std::sqrt(kT)));
        worst_far = std::max(worst_far, far / at_barrier);
    }
    const double elapsed = seconds_since(start);
    const bool pass = corner >= kFig1RelativeMin && corner <= kFig1RelativeMax &&
                      worst_far < kFarMoneynessFactor && elapsed < kBudgetSurfaceSeconds;
    report(1, pass,
           fmt("relative increase at barrier %.6g in [%g, %g]; far/barrier %.3g < %g; %.3fs", corner,
               kFig1RelativeMin, kFig1RelativeMax, worst_far, kFarMoneynessFactor, elapsed));
}

void moderate_inventory_regime() {
    const auto start = Clock::now();
    const auto c = regime(1.0);
    const GKernel kernel(c);
    const double corner = relative_increase(kernel, c, 0.0, 0.0);
    bool decreasing = true;
    double previous = corner;
    for (int j = 1; j < 50; ++j) {
        const double k = 2.0 * kSigma * std::sqrt(kT) * j / 49.0;
        const double value = relative_increase(kernel, c, 0.0, k);
        decreasing = decreasing && value < previous;
        previous = value;
    }
    const double short_horizon = relative_increase(kernel, c, kT - kShortHorizonTau, 0.0);
    const double elapsed = seconds_since(start);
    const bool pass = corner > kFig2RelativeMin && decreasing && short_horizon < kShortHorizonMax &&
                      elapsed < kBudgetSurfaceSeconds;
    report(2, pass,
           fmt("relative increase at barrier %.6g > %g; decreasing over 50-point ladder: %s; at T-t=%g: %.4g < %g; "
               "%.3fs",
               corner, kFig2RelativeMin, decreasing ? "yes" : "no", kShortHorizonTau, short_horizon,
               kShortHorizonMax, elapsed));
}

void zero_cost_limit() {
    const double limit = kSigma / kLambda * std::sqrt(kT) / std::sqrt(2.0 * M_PI);
    double previous_gap = std::numeric_limits<double>::infinity();
    bool shrinking = true;
    std::string gaps;
    for (double beta : {1e-1, 1e-2, 1e-3}) {
        auto c = regime(kLambda * beta * beta);
        const double extra = extra_rate(GKernel(c), c, kFigureModel, at_distance(0.0, 0.0));
        const double gap = std::abs(extra - limit) / limit;
        shrinking = shrinking && gap < previous_gap;
        previous_gap = gap;
        gaps += fmt(" %.3g", gap);
    }
    report(3, shrinking && previous_gap < kLimitGapMax,
           fmt("limit %.6f; relative gaps%s; shrinking: %s; final < %g", limit, gaps.c_str(),
               shrinking ? "yes" : "no", kLimitGapMax));
}

void oracle_equivalence() {
    const auto start = Clock::now();
    const auto c = regime(1.0);
    const GKernel kernel(c);
    const std::size_t resolutions[] = {100, 1000, 10000};
    bool pass = true;
    std::string detail;
    for (double rate : {0.0, -0.1}) {
        const SampledCurve drift{{0.0, kT}, {rate, rate}};
        const auto r = compare_with_closed_form(c, drift, resolutions);
        const auto& fine = r.checks.back();

        // The discrete first rate is a cell average; compare it with the
        // continuous cell average as well, for the record.
        const auto grid = uniform_grid(kT, fine.n_steps);
        const DeterministicDrift model{drift, 0.0};
        SampledCurve v1{grid, std::vector<double>(grid.size())};
        for (std::size_t i = 0; i < grid.size(); ++i) {
            v1.values[i] = v1_target_zone(kernel, c, model, TargetZoneState{grid[i], 0.0, 0.0});
        }
        const auto continuous = trajectory_from_signal(kernel, kX, v1, grid);
        const auto discrete = solve_discrete(make_discrete_problem(c, drift_increments(drift, grid)));
        const double cell_rate = (kX - continuous.positions[1]) / grid[1];
        const double cell_error = std::abs(discrete.rates[0] - cell_rate) / std::abs(cell_rate);

        const bool ok = fine.trajectory_error <= kTrajectoryErrorMax &&
                        fine.initial_rate_error <= kInitialRateErrorMax && r.trajectory_order >= kOrderMin;
        pass = pass && ok;
        detail += fmt("[drift %g: trajectory %.3g <= %g, u0 %.4g <= %g, order %.3f >= %g, u0 vs cell average "
                      "%.2g] ",
                      rate, fine.trajectory_error, kTrajectoryErrorMax, fine.initial_rate_error,
                      kInitialRateErrorMax, r.trajectory_order, kOrderMin, cell_error);
    }
    const double elapsed = seconds_since(start);
    report(4, pass && elapsed < kBudgetOracleSeconds, detail + fmt("%.2fs", elapsed));
}

/// Piecewise-constant direction with values uniform in [-1, 1].
std::vector<double> direction(std::size_t index) {
    NormalStream stream(2024, index, kProbeStreamTag);
    std::vector<double> knots(kDirectionKnots);
    for (auto& k : knots) {
        k = 2.0 * stream.uniform() - 1.0;
    }
    return knots;
}

void monte_carlo_optimality() {
    const auto start = Clock::now();
    MonteCarloSetup setup;
    setup.model = kFigureModel;
    setup.costs = regime(1e-5);
    setup.n_paths = kPaths;
    setup.n_steps = kOptimalitySteps;
    setup.seed = 1;
    setup.workers = 0;
    const GKernel kernel(setup.costs);
    const auto signal = tabulated_signal(kernel, setup.costs, setup.model, setup.workers);
    const auto optimal = optimal_policy(kernel, setup.n_steps);

    std::vector<Policy> policies{optimal, almgren_chriss_policy(kernel, setup.n_steps)};
    for (std::size_t d = 0; d < kDirections; ++d) {
        const auto knots = direction(d);
        policies.push_back([optimal, knots, n = setup.n_steps](const PolicyState& s) {
            const std::size_t piece = std::min(kDirectionKnots - 1, s.step * kDirectionKnots / n);
            return optimal(s) + kProbeEpsilon * knots[piece];
        });
    }
    const auto totals = simulate_totals(setup, policies, signal);
    const auto gain = summarize_difference(totals[0], totals[1], setup.seed);
    const bool separated = gain.mean > kSeparationSE * gain.std_error;

    std::size_t violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 2; k < policies.size(); ++k) {
        const auto diff = summarize_difference(totals[0], totals[k], setup.seed);
        const double score = diff.mean / diff.std_error;
        worst = std::min(worst, score);
        if (diff.mean < -kProbeSE * diff.std_error) {
            ++violations;
        }
    }
    const double elapsed = seconds_since(start);
    report(5, separated && violations == 0 && elapsed < kBudgetMonteCarloSeconds,
           fmt("V(opt)-V(AC) = %.6g, %.1f SE > %g; probe violations %zu of %zu (worst (V(opt)-V(probe))/SE %.2f "
               ">= -%g); %.1fs",
               gain.mean, gain.mean / gain.std_error, kSeparationSE, violations, policies.size() - 2, worst,
               kProbeSE, elapsed));
}

void value_consistency() {
    const auto start = Clock::now();
    MonteCarloSetup setup;
    setup.model = kFigureModel;
    setup.costs = regime(1e-5);
    setup.n_paths = kPaths;
    setup.n_steps = kValueSteps;
    setup.seed = 1;
    setup.workers = 0;
    const GKernel kernel(setup.costs);
    const auto signal = tabulated_signal(kernel, setup.costs, setup.model, setup.workers);
    const auto v0 = estimate_v0(setup, signal);
    const double v1 = v1_target_zone(kernel, setup.costs, setup.model, at_distance(0.0, 0.0));
    const double formula = value_formula(kernel, setup.costs, 1.0, v0.mean, v1);
    const auto realized = estimate_value(setup, optimal_policy(kernel, setup.n_steps), signal);
    const double combined = std::hypot(kLambda * v0.std_error, realized.std_error);
    const double gap = std::abs(formula - realized.mean);
    report(6, gap <= kValueSE * combined,
           fmt("formula %.6f vs realized %.6f: gap %.3g = %.2f combined SE <= %g (N = %zu); %.1fs", formula,
               realized.mean, gap, gap / combined, kValueSE, setup.n_steps, seconds_since(start)));
}

void lookback_consistency() {
    double worst_rel = 0.0;
    for (double u : {0.1, 0.5, 1.0}) {
        for (double k : {0.0, 0.2, 0.8}) {
            const double integral =
                ref::tanh_sinh([&](double s) { return s > 0.0 ? bachelier_theta(s, k, kSigma) : 0.0; }, 0.0, u);
            worst_rel = std::max(worst_rel, ref::relative_gap(integral, ref::bachelier_lookback(u, k, kSigma)));
        }
    }
    double worst_se = 0.0;
    std::uint64_t seed = 100;
    for (double u : {0.25, 0.5, 1.0}) {
        for (double k : {0.0, 0.1, 0.3}) {
            const double theta = bs_theta(u, 1.0, 1.0 - k, 0.4, 1.0);
            const auto est = ref::bs_lookback_theta_mc(u, 0.02 * u, 1.0, k, 0.4, 1000000, seed++);
            worst_se = std::max(worst_se, std::abs(est.mean - theta) / est.std_error);
        }
    }
    report(7, worst_rel <= kLookbackRelTol && worst_se <= kThetaSE,
           fmt("integrated Bachelier theta vs reflection price: worst rel %.2g <= %g; Black-Scholes theta vs MC "
               "maturity difference: worst %.2f SE <= %g",
               worst_rel, kLookbackRelTol, worst_se, kThetaSE));
}

void property_suites() {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    bool skorokhod = true;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const double p_bar = 1.0 + 0.2 * unit(gen);
        const MarketModel model = (seed % 2 == 0) ? MarketModel{CappedBachelier{1.0, 0.5, p_bar}}
                                                  : MarketModel{CappedBlackScholes{1.0, 0.5, p_bar}};
        NormalStream stream(seed, 0);
        const auto path = simulate_path(model, 1.0, 256, stream);
        double running = path.m[0];
        for (std::size_t i = 0; i < path.m.size(); ++i) {
            running = std::max(running, path.m[i]);
            const double expected = path.m[i] - std::max(running - p_bar, 0.0);
            skorokhod = skorokhod && path.m_star[i] == running && path.p[i] <= p_bar && path.p[i] <= path.m[i] &&
                        std::abs(path.p[i] - expected) <= 4e-16 * p_bar;
        }
    }

    bool monotone = true;
    for (int trial = 0; trial < 30; ++trial) {
        CostParams c = regime(std::pow(10.0, -5.0 + 5.0 * unit(gen)));
        const GKernel kernel(c);
        const double t = 0.9 * unit(gen);
        double previous = std::numeric_limits<double>::infinity();
        double k = 0.0;
        for (int j = 0; j < 20; ++j) {
            const double extra = extra_rate(kernel, c, kFigureModel, at_distance(t, k));
            monotone = monotone && extra <= previous && extra >= 0.0;
            previous = extra;
            k += 0.2 * kSigma * unit(gen);
        }
        const double bs_k = 0.3 * unit(gen);
        previous = -1.0;
        double m = 1.0 - bs_k;
        for (int j = 0; j < 20; ++j) {
            const double extra =
                extra_rate(kernel, c, CappedBlackScholes{0.5, kSigma, 1.0}, TargetZoneState{t, m, 1.0 - bs_k});
            monotone = monotone && extra >= previous;
            previous = extra;
            m += 0.2 * unit(gen);
        }
        previous = std::numeric_limits<double>::infinity();
        double lambda = 0.02;
        for (int j = 0; j < 20; ++j) {
            CostParams cl = c;
            cl.lambda = lambda;
            const double extra = extra_rate(GKernel(cl), cl, kFigureModel, at_distance(t, 0.1));
            monotone = monotone && extra <= previous;
            previous = extra;
            lambda += 0.1 * unit(gen);
        }
    }

    bool terminal = true;
    for (int trial = 0; trial < 1000; ++trial) {
        CostParams c;
        c.lambda = std::pow(10.0, -4.0 + 5.0 * unit(gen));
        c.gamma = std::pow(10.0, -6.0 + 8.0 * unit(gen));
        c.big_gamma = std::pow(10.0, -6.0 + 8.0 * unit(gen));
        c.horizon = 0.1 + 5.0 * unit(gen);
        terminal = terminal && urgency(GKernel(c), c.horizon) == c.big_gamma / c.lambda;
    }

    double rk4_error = 0.0;
    for (double cost : {1e-5, 1.0}) {
        const auto c = regime(cost);
        const GKernel kernel(c);
        const std::size_t steps = 1000;
        const double h = kT / static_cast<double>(steps);
        const auto riccati = [&](double, double a) { return c.gamma / c.lambda - a * a; };
        const auto position = [&](double t, double x) { return -urgency(kernel, t) * x; };
        double a = c.big_gamma / c.lambda;
        double x = kX;
        for (std::size_t i = 0; i < steps; ++i) {
            a = ref::rk4(riccati, a, h * i, h * (i + 1), 1);
            x = ref::rk4(position, x, h * i, h * (i + 1), 1);
            const double tau = h * (i + 1);
            rk4_error = std::max(rk4_error, ref::relative_gap(a, urgency(kernel, kT - tau)));
            rk4_error = std::max(rk4_error, std::abs(x - ac_position(kernel, tau, kX)));
        }
    }

    double digits_error = 0.0;
    for (double beta : {10.0, 100.0, 500.0, 700.0, 1000.0}) {
        for (double kappa : {1e-8, 1.0, 1e4}) {
            const GKernel kernel(beta, kappa, 1.0);
            const auto big = ref::g_big(beta, kappa, 1.0);
            digits_error = std::max(digits_error,
                                    ref::relative_gap(log_g_value(kernel, 1.0), static_cast<double>(log(big))));
            digits_error = std::max(digits_error,
                                    ref::relative_gap(urgency(kernel, 0.0), ref::urgency_big(beta, kappa, 1.0)));
            digits_error = std::max(
                digits_error, ref::relative_gap(g_ratio(kernel, 0.6, 1.0),
                                                static_cast<double>(ref::g_big(beta, kappa, 0.6) / big)));
        }
    }

    report(8, skorokhod && monotone && terminal && rk4_error <= kRk4Tol && digits_error <= kDigitsTol,
           fmt("Skorokhod over 1000 seeds: %s; monotone ladders: %s; urgency(T) == Gamma/lambda: %s; RK4 gap %.2g "
               "<= %g; 50-digit gap %.2g <= %g",
               skorokhod ? "ok" : "broken", monotone ? "ok" : "broken", terminal ? "exact" : "inexact", rk4_error,
               kRk4Tol, digits_error, kDigitsTol));
}

} // namespace

int main() {
    const std::function<void()> criteria[] = {low_inventory_regime, moderate_inventory_regime, zero_cost_limit,
                                              oracle_equivalence,   monte_carlo_optimality,    value_consistency,
                                              lookback_consistency, property_suites};
    int id = 1;
    for (const auto& run : criteria) {
        try {
            run();
        } catch (const std::exception& e) {
            report(id, false, std::string("threw: ") + e.what());
        }
        ++id;
    }
    std::printf("acceptance: %d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
