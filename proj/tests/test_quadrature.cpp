#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "tzopt/quadrature.hpp"

using namespace tzopt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Gauss-Legendre rule is symmetric and integrates degree 63 exactly", "[quadrature]") {
    const auto& rule = GaussLegendre32::get();
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < GaussLegendre32::size; ++i) {
        weight_sum += rule.weights[i];
        CHECK(rule.weights[i] > 0.0);
        CHECK_THAT(rule.nodes[i], WithinAbs(-rule.nodes[GaussLegendre32::size - 1 - i], 1e-15));
    }
    CHECK_THAT(weight_sum, WithinRel(2.0, 1e-14));
    for (int degree : {0, 1, 2, 10, 31, 62, 63}) {
        const double integral = gauss_legendre_panels([&](double x) { return std::pow(x, degree); }, 0.0, 1.0, 1);
        CHECK_THAT(integral, WithinRel(1.0 / (degree + 1), 1e-13));
    }
}

TEST_CASE("composite panels converge on smooth integrands", "[quadrature]") {
    const auto r = checked_integral([](double x) { return std::exp(-x) * std::cos(5.0 * x); }, 0.0, 3.0, 0.0);
    const double exact = (1.0 - std::exp(-3.0) * (std::cos(15.0) - 5.0 * std::sin(15.0))) / 26.0;
    CHECK_THAT(r.value, WithinRel(exact, 1e-13));
    CHECK_THAT(r.coarse, WithinRel(exact, 1e-12));
}

TEST_CASE("refinement check rejects a kinked integrand", "[quadrature]") {
    const auto kink = [](double x) { return std::abs(x - 0.123456789); };
    CHECK_THROWS_AS(checked_integral(kink, 0.0, 1.0, 0.0), QuadratureError);
    // an absolute floor above the panel gap accepts it
    CHECK_NOTHROW(checked_integral(kink, 0.0, 1.0, 1e-3));
}

TEST_CASE("non-finite integrands are reported", "[quadrature]") {
    const auto bad = [](double x) { return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0; };
    CHECK_THROWS_AS(checked_integral(bad, 0.0, 1.0, 1.0), QuadratureError);
}
