#include "tzopt/signals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tzopt/parallel.hpp"

namespace tzopt {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
// Time-to-go used in place of 0 for the first row of signal tables.
constexpr double kTinyRootTau = 1e-8;
// Scaled moneyness beyond which the signal is treated as 0.
constexpr double kTableMoneynessReach = 10.0;
// Spacing cap (relative to the horizon) for deterministic-drift trapezoids.
constexpr double kDriftPanelsPerHorizon = 4096.0;

/// G(T - s) / G(T - t) on the substituted variable s = t + w^2, tau = T - t.
struct DecayToNow {
    const GKernel& kernel;
    double tau;
    double scaled_tau;

    DecayToNow(const GKernel& k, double time_to_go)
        : kernel(k), tau(time_to_go), scaled_tau(k.scaled(time_to_go)) {}

    double operator()(double w) const {
        const double remaining = std::max(tau - w * w, 0.0);
        return std::exp(-kernel.beta() * (tau - remaining)) * kernel.scaled(remaining) / scaled_tau;
    }
};

/// checked_integral over [0, root] on pieces [0, onset], [onset, 8 onset],
/// [8 onset, 64 onset], ..., so the rise out of the flat region near w = 0
/// never hides inside one panel however small `onset` is.
template <class F>
double graded_integral(F&& f, double onset, double root, double abs_floor) {
    constexpr double kGrowth = 8.0;
    double left = 0.0;
    double right = std::min(onset, root);
    double total = 0.0;
    while (left < root) {
        if (right > left) {
            total += checked_integral(f, left, right, abs_floor).value;
        }
        left = right;
        right = (right > 0.0) ? std::min(kGrowth * right, root) : root;
    }
    return total;
}

/// int_0^{sqrt(tau)} [G ratio] 2 sigma phi(k / (sigma w)) dw, which equals
/// int_t^T [G ratio] bachelier_theta(s - t, k, sigma) ds.
double bachelier_integral(const GKernel& kernel, double sigma, double tau, double k) {
    const DecayToNow decay(kernel, tau);
    const double root = std::sqrt(tau);
    const auto integrand = [&](double w) {
        const double z = k / (sigma * w);
        return decay(w) * 2.0 * sigma * kInvSqrt2Pi * std::exp(-0.5 * z * z);
    };
    const double floor = 1e-14 * 2.0 * sigma * kInvSqrt2Pi * root;
    return graded_integral(integrand, k / sigma, root, floor);
}

/// Same substitution for the Black-Scholes theta; depends on (m, k) only
/// through m and log(1 + k / m).
double bs_integral(const GKernel& kernel, double sigma, double tau, double m, double k) {
    const DecayToNow decay(kernel, tau);
    const double root = std::sqrt(tau);
    const double log_gap = std::log1p(k / m);
    const auto integrand = [&](double w) {
        const double f = 0.5 * sigma * w - log_gap / (sigma * w);
        return decay(w) * m *
               (2.0 * sigma * kInvSqrt2Pi * std::exp(-0.5 * f * f) + sigma * sigma * w * normal_cdf(f));
    };
    const double floor = 1e-14 * m * (2.0 * sigma * kInvSqrt2Pi + sigma * sigma * root) * root;
    return graded_integral(integrand, log_gap / sigma, root, floor);
}

/// int_t^T G(T - s) / G(T - t) a(s) ds by trapezoid on the drift knots,
/// refined to spacing at most T / 4096.
double drift_integral(const GKernel& kernel, const SampledCurve& drift, double t) {
    const double horizon = kernel.horizon();
    if (t >= horizon) {
        return 0.0;
    }
    std::vector<double> knots{t};
    for (double s : drift.grid) {
        if (s > t && s < horizon) {
            knots.push_back(s);
        }
    }
    knots.push_back(horizon);

    const double tau = horizon - t;
    const double scaled_tau = kernel.scaled(tau);
    const auto weight = [&](double s) {
        const double remaining = horizon - s;
        return std::exp(-kernel.beta() * (s - t)) * kernel.scaled(remaining) / scaled_tau;
    };
    const double h_max = horizon / kDriftPanelsPerHorizon;
    double total = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        const double a = knots[i - 1];
        const double b = knots[i];
        const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / h_max));
        const double h = (b - a) / static_cast<double>(pieces);
        double left = weight(a) * drift(a);
        for (std::size_t j = 1; j <= pieces; ++j) {
            const double s = (j == pieces) ? b : a + h * static_cast<double>(j);
            const double right = weight(s) * drift(s);
            total += 0.5 * h * (left + right);
            left = right;
        }
    }
    return total;
}

struct Stencil {
    std::size_t first;
    std::array<double, 4> weights;
};

/// Four-point Lagrange stencil on a uniform grid of n >= 4 nodes 0, step, ...
Stencil cubic_stencil(double x, double step, std::size_t n) {
    const double s = x / step;
    const auto cell = static_cast<std::ptrdiff_t>(std::floor(s));
    const auto first = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(cell - 1, 0, static_cast<std::ptrdiff_t>(n) - 4));
    const double u = s - static_cast<double>(first);
    return {first,
            {-(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0, u * (u - 2.0) * (u - 3.0) / 2.0,
             -u * (u - 1.0) * (u - 3.0) / 2.0, u * (u - 1.0) * (u - 2.0) / 6.0}};
}

void require_time(const GKernel& kernel, double t) {
    if (!std::isfinite(t) || t < 0.0 || t > kernel.horizon()) {
        throw std::invalid_argument("signal time outside [0, T]");
    }
}

void require_surface_grid(std::span<const double> grid, const char* name) {
    if (grid.empty()) {
        throw std::invalid_argument(std::string(name) + " grid is empty");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument(std::string(name) + " grid must be strictly increasing");
        }
    }
}

} // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double bachelier_theta(double u, double moneyness, double sigma) {
    if (!(u > 0.0)) {
        throw std::invalid_argument("bachelier_theta: maturity must be > 0");
    }
    if (moneyness < 0.0) {
        throw std::invalid_argument("bachelier_theta: moneyness must be >= 0");
    }
    const double scale = sigma * std::sqrt(u);
    return sigma / std::sqrt(u) * normal_pdf(moneyness / scale);
}

double bs_f(double u, double m, double p, double sigma, double p_bar) {
    if (!(u > 0.0)) {
        throw std::invalid_argument("bs_f: maturity must be > 0");
    }
    if (!(m > 0.0)) {
        throw std::invalid_argument("bs_f: m must be > 0");
    }
    if (p > p_bar) {
        throw std::invalid_argument("bs_f: price above the cap");
    }
    const double scale = sigma * std::sqrt(u);
    return 0.5 * scale - std::log1p((p_bar - p) / m) / scale;
}

double bs_theta(double u, double m, double p, double sigma, double p_bar) {
    const double f = bs_f(u, m, p, sigma, p_bar);
    return m * (sigma / std::sqrt(u) * normal_pdf(f) + 0.5 * sigma * sigma * normal_cdf(f));
}

double moneyness(const MarketModel& model, const TargetZoneState& state) {
    double p_bar = 0.0;
    if (const auto* b = std::get_if<CappedBachelier>(&model)) {
        p_bar = b->p_bar;
    } else if (const auto* s = std::get_if<CappedBlackScholes>(&model)) {
        p_bar = s->p_bar;
    } else {
        throw std::invalid_argument("moneyness is defined for capped models only");
    }
    const double k = p_bar - state.p;
    if (k < -1e-12 * std::max(1.0, std::abs(p_bar))) {
        throw std::invalid_argument("state price lies above the cap");
    }
    return std::max(k, 0.0);
}

double v1_target_zone(const GKernel& kernel, const CostParams& costs, const MarketModel& model,
                      const TargetZoneState& state) {
    require_time(kernel, state.t);
    const double tau = kernel.horizon() - state.t;
    const double half_inv_lambda = 0.5 / costs.lambda;

    if (const auto* bach = std::get_if<CappedBachelier>(&model)) {
        const double k = moneyness(model, state);
        if (tau <= 0.0) {
            return 0.0;
        }
        return -half_inv_lambda * bachelier_integral(kernel, bach->sigma, tau, k);
    }
    if (const auto* bs = std::get_if<CappedBlackScholes>(&model)) {
        const double k = moneyness(model, state);
        if (!(state.m > 0.0)) {
            throw std::invalid_argument("Black-Scholes state needs m > 0");
        }
        if (state.p > state.m * (1.0 + 1e-12)) {
            throw std::invalid_argument("Black-Scholes state needs p <= m");
        }
        if (tau <= 0.0) {
            return 0.0;
        }
        return -half_inv_lambda * bs_integral(kernel, bs->sigma, tau, state.m, k);
    }
    if (const auto* drift = std::get_if<DeterministicDrift>(&model)) {
        return half_inv_lambda * drift_integral(kernel, drift->drift, state.t);
    }
    return 0.0;
}

double extra_rate(const GKernel& kernel, const CostParams& costs, const MarketModel& model,
                  const TargetZoneState& state) {
    return -v1_target_zone(kernel, costs, model, state);
}

double full_rate(const GKernel& kernel, const CostParams& costs, const MarketModel& model,
                 const TargetZoneState& state, double x) {
    return urgency(kernel, state.t) * x + extra_rate(kernel, costs, model, state);
}

RateSurface rate_surface(const GKernel& kernel, const CostParams& costs, const MarketModel& model,
                         std::span<const double> grid_tau, std::span<const double> grid_money,
                         double x, std::optional<double> bs_m, unsigned workers) {
    validate(model);
    if (!is_capped(model)) {
        throw std::invalid_argument("rate surfaces need a capped model");
    }
    require_surface_grid(grid_tau, "tau");
    require_surface_grid(grid_money, "moneyness");
    if (grid_tau.front() <= 0.0 || grid_tau.back() > kernel.horizon()) {
        throw std::invalid_argument("tau grid must lie in (0, T]");
    }
    if (grid_money.front() < 0.0) {
        throw std::invalid_argument("moneyness grid must be >= 0");
    }
    const bool black_scholes = std::holds_alternative<CappedBlackScholes>(model);
    if (black_scholes && (!bs_m || !(*bs_m > 0.0))) {
        throw std::invalid_argument("Black-Scholes surfaces need an uncapped price slice m > 0");
    }

    RateSurface surface;
    surface.tau.assign(grid_tau.begin(), grid_tau.end());
    surface.moneyness.assign(grid_money.begin(), grid_money.end());
    const std::size_t cells = surface.tau.size() * surface.moneyness.size();
    surface.rate.resize(cells);
    surface.rate_ac.resize(cells);
    surface.rate_extra.resize(cells);
    surface.relative_increase.resize(cells);

    const double half_inv_lambda = 0.5 / costs.lambda;
    parallel_blocks(cells, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            const double tau = surface.tau[c / surface.moneyness.size()];
            const double k = surface.moneyness[c % surface.moneyness.size()];
            const double t = kernel.horizon() - tau;
            double extra = 0.0;
            if (black_scholes) {
                const auto& bs = std::get<CappedBlackScholes>(model);
                extra = half_inv_lambda * bs_integral(kernel, bs.sigma, tau, *bs_m, k);
            } else {
                const auto& bach = std::get<CappedBachelier>(model);
                extra = half_inv_lambda * bachelier_integral(kernel, bach.sigma, tau, k);
            }
            const double ac = urgency(kernel, t) * x;
            surface.rate_ac[c] = ac;
            surface.rate_extra[c] = extra;
            surface.rate[c] = ac + extra;
            surface.relative_increase[c] = extra / ac;
        }
    });
    return surface;
}

TabulatedSignal::TabulatedSignal(const GKernel& kernel, const CostParams& costs,
                                 const MarketModel& model, TableResolution resolution,
                                 unsigned workers)
    : horizon_(kernel.horizon()), lambda_(costs.lambda) {
    validate(model);
    if (std::holds_alternative<Martingale>(model)) {
        kind_ = Kind::zero;
        return;
    }
    if (const auto* drift = std::get_if<DeterministicDrift>(&model)) {
        kind_ = Kind::drift;
        n_x_ = std::max<std::size_t>(resolution.time_nodes, 4);
        x_step_ = horizon_ / static_cast<double>(n_x_ - 1);
        table_.resize(n_x_);
        parallel_blocks(n_x_, workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t j = begin; j < end; ++j) {
                const double t = std::min(horizon_, x_step_ * static_cast<double>(j));
                table_[j] = 0.5 / lambda_ * drift_integral(kernel, drift->drift, t);
            }
        });
        return;
    }

    const bool black_scholes = std::holds_alternative<CappedBlackScholes>(model);
    kind_ = black_scholes ? Kind::black_scholes : Kind::bachelier;
    if (black_scholes) {
        const auto& bs = std::get<CappedBlackScholes>(model);
        sigma_ = bs.sigma;
        p_bar_ = bs.p_bar;
        x_max_ = kTableMoneynessReach + 0.5 * sigma_ * std::sqrt(horizon_);
    } else {
        const auto& bach = std::get<CappedBachelier>(model);
        sigma_ = bach.sigma;
        p_bar_ = bach.p_bar;
        x_max_ = kTableMoneynessReach;
    }
    n_r_ = std::max<std::size_t>(resolution.root_tau_nodes, 4);
    n_x_ = std::max<std::size_t>(resolution.moneyness_nodes, 4);
    r_step_ = 1.0 / static_cast<double>(n_r_ - 1);
    x_step_ = x_max_ / static_cast<double>(n_x_ - 1);
    table_.resize(n_r_ * n_x_);

    parallel_blocks(n_r_, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double r = std::max(kTinyRootTau, r_step_ * static_cast<double>(i));
            const double tau = horizon_ * r * r;
            const double root = std::sqrt(tau);
            for (std::size_t j = 0; j < n_x_; ++j) {
                const double scaled = x_step_ * static_cast<double>(j);
                double normalized = 0.0;
                if (black_scholes) {
                    const double k = std::expm1(scaled * sigma_ * root);
                    normalized = bs_integral(kernel, sigma_, tau, 1.0, k) / root;
                } else {
                    const double k = scaled * sigma_ * root;
                    normalized = bachelier_integral(kernel, sigma_, tau, k) / (2.0 * sigma_ * root);
                }
                table_[i * n_x_ + j] = normalized;
            }
        }
    });
}

double TabulatedSignal::operator()(double t, double m, double p) const {
    switch (kind_) {
    case Kind::zero:
        return 0.0;
    case Kind::drift: {
        const double s = std::clamp(t, 0.0, horizon_);
        const auto st = cubic_stencil(s, x_step_, n_x_);
        double v = 0.0;
        for (std::size_t a = 0; a < 4; ++a) {
            v += st.weights[a] * table_[st.first + a];
        }
        return v;
    }
    case Kind::bachelier:
    case Kind::black_scholes:
        break;
    }

    const double tau = horizon_ - t;
    if (!(tau > 0.0)) {
        return 0.0;
    }
    const double root = std::sqrt(tau);
    const double k = std::max(p_bar_ - p, 0.0);
    const bool black_scholes = kind_ == Kind::black_scholes;
    const double scaled = black_scholes ? std::log1p(k / m) / (sigma_ * root) : k / (sigma_ * root);
    if (scaled >= x_max_) {
        return 0.0;
    }
    const double r = std::sqrt(tau / horizon_);
    const auto sr = cubic_stencil(r, r_step_, n_r_);
    const auto sx = cubic_stencil(scaled, x_step_, n_x_);
    double normalized = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
        const double* row = &table_[(sr.first + a) * n_x_ + sx.first];
        const double along = sx.weights[0] * row[0] + sx.weights[1] * row[1] +
                             sx.weights[2] * row[2] + sx.weights[3] * row[3];
        normalized += sr.weights[a] * along;
    }
    // Bachelier: -v1 = normalized sigma sqrt(tau) / lambda.
    // Black-Scholes: -v1 = normalized m sqrt(tau) / (2 lambda).
    return black_scholes ? -normalized * m * root / (2.0 * lambda_)
                         : -normalized * sigma_ * root / lambda_;
}

} // namespace tzopt
