#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "support/reference.hpp"
#include "tzopt/signals.hpp"

using namespace tzopt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CostParams costs(double lambda, double gamma, double big_gamma) {
    CostParams c;
    c.lambda = lambda;
    c.gamma = gamma;
    c.big_gamma = big_gamma;
    return c;
}

/// State of the capped Bachelier price at distance k below the cap.
TargetZoneState at_distance(double t, double p_bar, double k) { return {t, p_bar - k, p_bar - k}; }

} // namespace

TEST_CASE("integrated Bachelier theta reproduces the reflection-principle lookback price", "[signals]") {
    const double sigma = 0.5;
    for (double u : {0.1, 0.5, 1.0}) {
        for (double k : {0.0, 0.2, 0.8}) {
            const double integral =
                ref::tanh_sinh([&](double s) { return s > 0.0 ? bachelier_theta(s, k, sigma) : 0.0; }, 0.0, u);
            CHECK_THAT(integral, WithinRel(ref::bachelier_lookback(u, k, sigma), 1e-8));
        }
    }
}

TEST_CASE("Bachelier signal matches direct adaptive quadrature of its definition", "[signals]") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 60; ++i) {
        const double lambda = 0.05 + unit(gen);
        const double gamma = std::pow(10.0, -5.0 + 5.0 * unit(gen));
        const double big_gamma = std::pow(10.0, -5.0 + 5.0 * unit(gen));
        const auto c = costs(lambda, gamma, big_gamma);
        const GKernel kernel(c);
        const double sigma = 0.1 + unit(gen);
        const CappedBachelier model{1.0, sigma, 1.3};
        const double t = 0.98 * unit(gen);
        const double k = 1.5 * sigma * unit(gen) * unit(gen);
        const double expected =
            ref::v1_bachelier(lambda, kernel.beta(), big_gamma / lambda, 1.0 - t, k, sigma);
        CHECK_THAT(v1_target_zone(kernel, c, model, at_distance(t, 1.3, k)), WithinRel(expected, 1e-8));
    }
}

TEST_CASE("Black-Scholes signal matches direct adaptive quadrature of its definition", "[signals]") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        const auto c = costs(0.1, std::pow(10.0, -4.0 + 4.0 * unit(gen)), 1.0);
        const GKernel kernel(c);
        const double sigma = 0.1 + 0.6 * unit(gen);
        const CappedBlackScholes model{1.0, sigma, 1.5};
        const double t = 0.95 * unit(gen);
        const double m = 0.8 + unit(gen);
        const double k = 0.5 * unit(gen) * unit(gen);
        const TargetZoneState state{t, m, std::min(m, 1.5 - k)};
        const double expected = ref::v1_black_scholes(0.1, kernel.beta(), 10.0, 1.0 - t, m,
                                                      1.5 - state.p, sigma);
        CHECK_THAT(v1_target_zone(kernel, c, model, state), WithinRel(expected, 1e-8));
    }
}

TEST_CASE("extra rate approaches the zero-inventory-cost limit", "[signals]") {
    const double lambda = 0.1;
    const double sigma = 0.5;
    const double limit = sigma / lambda / std::sqrt(2.0 * M_PI);
    double previous_gap = 1e300;
    for (double beta : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const auto c = costs(lambda, lambda * beta * beta, lambda * beta * beta);
        const double extra = extra_rate(GKernel(c), c, CappedBachelier{1.0, sigma, 1.0}, at_distance(0.0, 1.0, 0.0));
        const double gap = std::abs(extra - limit) / limit;
        CHECK(gap < previous_gap);
        previous_gap = gap;
    }
    CHECK(previous_gap < 1e-4);
    CHECK_THAT(limit, WithinAbs(1.99471, 5e-6));
}

TEST_CASE("extra rate is monotone along randomized ladders", "[signals][property]") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double gamma = std::pow(10.0, -5.0 + 5.0 * unit(gen));
        const double big_gamma = std::pow(10.0, -5.0 + 5.0 * unit(gen));
        const double lambda = 0.02 + 0.5 * unit(gen);
        const double sigma = 0.1 + unit(gen);
        const double t = 0.9 * unit(gen);
        const auto c = costs(lambda, gamma, big_gamma);
        const GKernel kernel(c);

        const CappedBachelier bach{0.0, sigma, 1.0};
        double previous = 1e300;
        double k_ladder = 0.0;
        for (int j = 0; j < 25; ++j) {
            const double k = k_ladder;
            k_ladder += 0.2 * sigma * unit(gen);
            const double extra = extra_rate(kernel, c, bach, at_distance(t, 1.0, k));
            REQUIRE(extra >= 0.0);
            REQUIRE(extra <= previous);
            previous = extra;
        }

        const CappedBlackScholes bs{0.5, sigma, 2.0};
        const double k = 0.3 * unit(gen);
        previous = -1.0;
        for (int j = 0; j < 20; ++j) {
            const double m = 2.0 - k + 0.1 * j;  // p = 2 - k <= m
            const double extra = extra_rate(kernel, c, bs, TargetZoneState{t, m, 2.0 - k});
            REQUIRE(extra >= previous);
            previous = extra;
        }

        // larger impact lambda, with the inventory costs fixed, sells less
        previous = 1e300;
        for (int j = 0; j < 20; ++j) {
            const auto cl = costs(lambda * (1.0 + 0.25 * j), gamma, big_gamma);
            const double extra = extra_rate(GKernel(cl), cl, bach, at_distance(t, 1.0, 0.2 * sigma));
            REQUIRE(extra <= previous);
            previous = extra;
        }
    }
}

TEST_CASE("signal vanishes far from the cap and at the horizon", "[signals]") {
    const auto c = costs(0.1, 1e-5, 1e-5);
    const GKernel kernel(c);
    const CappedBachelier model{1.0, 0.5, 1.0};
    const double at_barrier = extra_rate(kernel, c, model, at_distance(0.0, 1.0, 0.0));
    for (double k : {5.0, 6.0, 10.0}) {
        CHECK(extra_rate(kernel, c, model, at_distance(0.0, 1.0, k)) < 1e-8 * at_barrier);
    }
    CHECK(v1_target_zone(kernel, c, model, at_distance(1.0, 1.0, 0.0)) == 0.0);
    CHECK(v1_target_zone(kernel, c, Martingale{1.0, 0.5}, TargetZoneState{0.3, 1.0, 1.0}) == 0.0);
}

TEST_CASE("deterministic drift signal matches the closed form for constant drift", "[signals]") {
    const auto c = costs(0.1, 1.0, 1.0);
    const GKernel kernel(c);
    const DeterministicDrift model{SampledCurve{{0.0, 1.0}, {-0.1, -0.1}}, 0.0};
    for (double t : {0.0, 0.3, 0.9}) {
        const double tau = 1.0 - t;
        const double beta = kernel.beta();
        // int_0^tau G(r) dr = sinh(beta tau) + kappa (cosh(beta tau) - 1) / beta
        const double integral = std::sinh(beta * tau) + 10.0 * (std::cosh(beta * tau) - 1.0) / beta;
        const double expected = 0.5 / 0.1 * -0.1 * integral / ref::g_plain(beta, 10.0, tau);
        CHECK_THAT(v1_target_zone(kernel, c, model, TargetZoneState{t, 0.0, 0.0}), WithinRel(expected, 1e-7));
    }
}

TEST_CASE("Black-Scholes theta is consistent with its f-representation", "[signals]") {
    // bs_theta / m - (sigma^2 / 2) Phi(f) = (sigma / sqrt(u)) phi(f)
    for (double u : {0.05, 0.5, 2.0}) {
        for (double p : {0.6, 0.9, 1.0}) {
            const double f = bs_f(u, 1.2, p, 0.4, 1.0);
            CHECK(f <= 0.5 * 0.4 * std::sqrt(u));
            const double theta = bs_theta(u, 1.2, p, 0.4, 1.0);
            CHECK_THAT(theta / 1.2 - 0.08 * normal_cdf(f), WithinRel(0.4 / std::sqrt(u) * normal_pdf(f), 1e-12));
        }
    }
}

TEST_CASE("Black-Scholes theta matches a maturity finite difference of exact lookback prices", "[signals]") {
    const auto est = ref::bs_lookback_theta_mc(0.5, 0.01, 1.0, 0.1, 0.4, 400000, 99);
    const double theta = bs_theta(0.5, 1.0, 0.9, 0.4, 1.0);
    CHECK(std::abs(est.mean - theta) <= 3.0 * est.std_error);
}

TEST_CASE("tabulated signal tracks the quadrature signal", "[signals]") {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto c = costs(0.1, 1e-5, 1e-5);
    const GKernel kernel(c);
    const MarketModel models[] = {CappedBachelier{1.0, 0.5, 1.0}, CappedBlackScholes{1.0, 0.5, 1.0},
                                  DeterministicDrift{SampledCurve{{0.0, 0.4, 1.0}, {0.2, -0.3, 0.1}}, 0.0}};
    for (const auto& model : models) {
        const TabulatedSignal table(kernel, c, model);
        double worst = 0.0;
        for (int i = 0; i < 400; ++i) {
            const double t = 0.999 * unit(gen);
            const double m = 0.6 + 0.8 * unit(gen);
            const double p = std::min(m, 1.0) - 0.3 * unit(gen) * unit(gen);
            const TargetZoneState state{t, m, p};
            const double exact = v1_target_zone(kernel, c, model, state);
            const double scale = std::abs(v1_target_zone(kernel, c, model, TargetZoneState{t, m, std::min(m, 1.0)}));
            worst = std::max(worst, std::abs(table(t, m, p) - exact) / std::max(scale, 1e-12));
        }
        INFO("model index " << model.index());
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("rate surface cells equal direct evaluations", "[signals]") {
    const auto c = costs(0.1, 1.0, 1.0);
    const GKernel kernel(c);
    const CappedBachelier model{1.0, 0.5, 1.0};
    const std::vector<double> tau{0.25, 1.0};
    const std::vector<double> money{0.0, 0.1, 0.4};
    const auto s = rate_surface(kernel, c, model, tau, money, 1.0);
    for (std::size_t i = 0; i < tau.size(); ++i) {
        for (std::size_t j = 0; j < money.size(); ++j) {
            const auto state = at_distance(1.0 - tau[i], 1.0, money[j]);
            const auto k = s.index(i, j);
            CHECK_THAT(s.rate[k], WithinRel(full_rate(kernel, c, model, state, 1.0), 1e-14));
            CHECK_THAT(s.rate_ac[k], WithinRel(urgency(kernel, 1.0 - tau[i]), 1e-14));
            CHECK_THAT(s.relative_increase[k], WithinRel(s.rate_extra[k] / s.rate_ac[k], 1e-14));
        }
    }
    const std::vector<double> bad_tau{0.0, 1.0};
    CHECK_THROWS_AS(rate_surface(kernel, c, model, bad_tau, money, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rate_surface(kernel, c, Martingale{}, tau, money, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rate_surface(kernel, c, CappedBlackScholes{1.0, 0.5, 1.0}, tau, money, 1.0),
                    std::invalid_argument);
}

TEST_CASE("signal inputs are validated", "[signals]") {
    CHECK_THROWS_AS(bachelier_theta(0.0, 0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(bachelier_theta(1.0, -0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(bs_theta(1.0, 1.0, 1.1, 0.5, 1.0), std::invalid_argument);
    const auto c = costs(0.1, 1.0, 1.0);
    const GKernel kernel(c);
    CHECK_THROWS_AS(v1_target_zone(kernel, c, CappedBachelier{1.0, 0.5, 1.0}, TargetZoneState{0.0, 1.2, 1.2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(v1_target_zone(kernel, c, CappedBachelier{1.0, 0.5, 1.0}, TargetZoneState{1.5, 1.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(moneyness(Martingale{}, TargetZoneState{}), std::invalid_argument);
}
