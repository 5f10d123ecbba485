#pragma once

#include <span>
#include <variant>
#include <vector>

#include "tzopt/schedule.hpp"

namespace tzopt {

/// Arithmetic Brownian motion M = m0 + sigma B, capped at p_bar by the
/// Skorokhod map P = M - (M* - p_bar)^+.
struct CappedBachelier {
    double m0 = 1.0;
    double sigma = 0.5;
    double p_bar = 1.0;

    void validate() const;
};

/// Geometric Brownian motion M = m0 exp(sigma B - sigma^2 t / 2), capped at p_bar.
struct CappedBlackScholes {
    double m0 = 1.0;
    double sigma = 0.5;
    double p_bar = 1.0;

    void validate() const;
};

/// Deterministic price P_t = p0 + int_0^t a(s) ds with drift rate a(t)
/// piecewise-linear between the samples of `drift`.
struct DeterministicDrift {
    SampledCurve drift;
    double p0 = 1.0;

    void validate() const;
};

/// Uncapped martingale P = p0 + sigma B. sigma = 0 gives a constant price.
struct Martingale {
    double p0 = 1.0;
    double sigma = 0.0;

    void validate() const;
};

using MarketModel = std::variant<CappedBachelier, CappedBlackScholes, DeterministicDrift, Martingale>;

void validate(const MarketModel& model);

[[nodiscard]] bool is_capped(const MarketModel& model);

/// Price at time 0 (the capped price for capped models).
[[nodiscard]] double initial_price(const MarketModel& model);

/// Exact integrals of the piecewise-linear drift over each grid step,
/// int_{t_i}^{t_{i+1}} a(s) ds; one entry per step.
std::vector<double> drift_increments(const SampledCurve& drift, std::span<const double> grid);

/// Observable state fed to target-zone signals: time, uncapped price m
/// (only read by Black-Scholes) and capped price p.
struct TargetZoneState {
    double t = 0.0;
    double m = 1.0;
    double p = 1.0;
};

} // namespace tzopt
