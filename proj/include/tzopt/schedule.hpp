#pragma once

#include <span>
#include <vector>

namespace tzopt {

/// Cost and horizon parameters of the execution problem.
///
/// Trades cost `lambda * u^2` per unit time, unsold inventory costs
/// `gamma * X^2` per unit time and `big_gamma * X_T^2` at the horizon.
struct CostParams {
    double lambda = 0.1;
    double gamma = 1.0;
    double big_gamma = 1.0;
    double horizon = 1.0;
    double x0 = 1.0;

    /// Throws std::invalid_argument unless lambda, gamma, big_gamma and
    /// horizon are finite and strictly positive and x0 is finite.
    void validate() const;

    [[nodiscard]] double beta() const;
};

/// The urgency kernel G(t) = beta cosh(beta t) + (Gamma/lambda) sinh(beta t).
///
/// Internally G is carried in the scaled form
///   G(t) = beta e^{beta t} Hs(t),
///   Hs(t) = 1 - beta q(t) + kappa q(t),   q(t) = (1 - e^{-2 beta t}) / (2 beta),
/// where kappa = Gamma/lambda. Every term of Hs is nonnegative, so ratios of G
/// never cancel catastrophically for small beta and never overflow for large
/// beta t.
class GKernel {
public:
    explicit GKernel(const CostParams& costs);
    GKernel(double beta, double gamma_ratio, double horizon);

    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] double gamma_ratio() const noexcept { return kappa_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }

    /// q(t) = (1 - e^{-2 beta t}) / (2 beta); tends to t as beta -> 0.
    [[nodiscard]] double q(double t) const noexcept;
    /// G(t) / (beta e^{beta t}).
    [[nodiscard]] double scaled(double t) const noexcept;

private:
    double beta_;
    double kappa_;
    double horizon_;
};

/// A function of time sampled on an increasing grid, linear between samples
/// and held constant outside the sampled range.
struct SampledCurve {
    std::vector<double> grid;
    std::vector<double> values;

    [[nodiscard]] double operator()(double t) const;
    void validate() const;
};

/// Sampled execution schedule. `rates[i]` is the selling rate in force from
/// `grid[i]`; u > 0 means selling.
struct TradePlan {
    std::vector<double> grid;
    std::vector<double> positions;
    std::vector<double> rates;
};

/// Closed uniform grid 0 = t_0 < ... < t_n = horizon (n + 1 points).
std::vector<double> uniform_grid(double horizon, std::size_t n_steps);

/// G(t) for t >= 0. Overflows to +inf once G exceeds the double range
/// (beta t beyond roughly 709); use log_g_value there.
double g_value(const GKernel& kernel, double t);

double log_g_value(const GKernel& kernel, double t);

/// G(a) / G(b), for a, b >= 0.
double g_ratio(const GKernel& kernel, double a, double b);

/// G'(T - t) / G(T - t), the positive selling urgency (equals -v2(t)).
/// Exactly Gamma/lambda at t = T.
double urgency(const GKernel& kernel, double t);

/// Position of the signal-free optimal schedule, G(T - t) / G(T) * x0.
double ac_position(const GKernel& kernel, double t, double x0);

/// Feedback rate u = urgency(t) * x - v1(t).
///
/// The result may be negative (buying) and may drive the position below
/// zero; the model imposes no short-sale constraint.
double optimal_rate(const GKernel& kernel, double t, double x, double v1_signal);

/// Optimal positions for a deterministic signal curve v1, evaluated from the
/// variation-of-constants formula with composite trapezoid quadrature on the
/// union of `grid` and the curve's own samples. Rates are back-filled from the
/// feedback law. Throws std::invalid_argument for grids that do not start at
/// 0, are not strictly increasing, or run past the horizon.
TradePlan trajectory_from_signal(const GKernel& kernel, double x0,
                                 const SampledCurve& v1_curve,
                                 std::span<const double> grid);

/// Optimal value P0 x + lambda [v0(0) + 2 v1(0) x + v2(0) x^2], with
/// x = costs.x0 and v2(0) = -urgency(0).
double value_formula(const GKernel& kernel, const CostParams& costs, double p0,
                     double v0_0, double v1_0);

} // namespace tzopt
