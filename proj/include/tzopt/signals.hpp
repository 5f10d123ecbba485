#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tzopt/market_model.hpp"
#include "tzopt/quadrature.hpp"
#include "tzopt/schedule.hpp"

namespace tzopt {

double normal_pdf(double x);
/// Standard normal CDF via erfc, accurate in relative terms in the lower tail.
double normal_cdf(double x);

/// Maturity derivative of a fixed-strike lookback call in the Bachelier
/// model: (sigma / sqrt(u)) phi(moneyness / (sigma sqrt(u))).
/// Throws std::invalid_argument for u <= 0 or moneyness < 0.
double bachelier_theta(double u, double moneyness, double sigma);

/// sigma sqrt(u) / 2 - log((p_bar - p) / m + 1) / (sigma sqrt(u)); never
/// exceeds sigma sqrt(u) / 2.
double bs_f(double u, double m, double p, double sigma, double p_bar);

/// Maturity derivative of a fixed-strike lookback call in the Black-Scholes
/// model: m [(sigma / sqrt(u)) phi(f) + (sigma^2 / 2) Phi(f)].
double bs_theta(double u, double m, double p, double sigma, double p_bar);

/// Distance p_bar - p to the cap, clamped at 0 within rounding. Throws when
/// the state lies above the cap, or for uncapped models.
double moneyness(const MarketModel& model, const TargetZoneState& state);

/// Signal coefficient
///   v1(t) = (1 / 2 lambda) int_t^T G(T - s) / G(T - t) dA_s
/// with dA_s = -theta(s - t) ds for the capped models and dA_s = a(s) ds for
/// deterministic drift. Zero for the martingale model and at t = T.
///
/// Capped models use the substitution s = t + w^2 and panel Gauss-Legendre
/// on pieces graded geometrically from the onset of the boundary layer at w = 0
/// (see checked_integral); throws QuadratureError when the refinement check
/// fails.
double v1_target_zone(const GKernel& kernel, const CostParams& costs, const MarketModel& model,
                      const TargetZoneState& state);

/// Extra selling rate induced by the signal, -v1. Nonnegative for capped models.
double extra_rate(const GKernel& kernel, const CostParams& costs, const MarketModel& model,
                  const TargetZoneState& state);

/// urgency(t) x + extra_rate.
double full_rate(const GKernel& kernel, const CostParams& costs, const MarketModel& model,
                 const TargetZoneState& state, double x);

/// Row-major (tau outer, moneyness inner) surfaces of the optimal rate and
/// its decomposition.
struct RateSurface {
    std::vector<double> tau;
    std::vector<double> moneyness;
    std::vector<double> rate;
    std::vector<double> rate_ac;
    std::vector<double> rate_extra;
    std::vector<double> relative_increase;

    [[nodiscard]] std::size_t index(std::size_t i_tau, std::size_t i_money) const {
        return i_tau * moneyness.size() + i_money;
    }
};

/// Evaluates full_rate on the (time-to-go, moneyness) grid at t = T - tau.
/// Black-Scholes surfaces need the uncapped price slice `bs_m`.
RateSurface rate_surface(const GKernel& kernel, const CostParams& costs, const MarketModel& model,
                         std::span<const double> grid_tau, std::span<const double> grid_money,
                         double x, std::optional<double> bs_m = std::nullopt, unsigned workers = 1);

struct TableResolution {
    std::size_t root_tau_nodes = 65;
    std::size_t moneyness_nodes = 641;
    std::size_t time_nodes = 4097;  // deterministic drift only
};

/// Interpolated v1 for Monte Carlo hot loops.
///
/// Capped models tabulate a normalized signal on a uniform grid in
/// r = sqrt(tau / T) and a scaled moneyness (k / (sigma sqrt(tau)) for
/// Bachelier, log(1 + k / m) / (sigma sqrt(tau)) for Black-Scholes) and
/// interpolate bicubically; beyond the last moneyness node the signal is
/// below 1e-20 of its at-barrier value and is returned as 0.
class TabulatedSignal {
public:
    TabulatedSignal(const GKernel& kernel, const CostParams& costs, const MarketModel& model,
                    TableResolution resolution = {}, unsigned workers = 1);

    /// v1 at time t for uncapped price m and capped price p.
    [[nodiscard]] double operator()(double t, double m, double p) const;

private:
    enum class Kind { zero, bachelier, black_scholes, drift };

    Kind kind_ = Kind::zero;
    double horizon_ = 1.0;
    double lambda_ = 1.0;
    double sigma_ = 0.0;
    double p_bar_ = 0.0;
    double x_max_ = 0.0;
    double r_step_ = 0.0;
    double x_step_ = 0.0;
    std::size_t n_r_ = 0;
    std::size_t n_x_ = 0;
    std::vector<double> table_;
};

} // namespace tzopt
