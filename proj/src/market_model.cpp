#include "tzopt/market_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tzopt {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(name) + " must be finite");
    }
}

template <class Capped>
void validate_capped(const Capped& m, const char* label) {
    require_finite(m.m0, "m0");
    require_finite(m.p_bar, "p_bar");
    if (!std::isfinite(m.sigma) || m.sigma <= 0.0) {
        throw std::invalid_argument(std::string(label) + ": sigma must be > 0");
    }
    if (m.p_bar < m.m0) {
        throw std::invalid_argument(std::string(label) + ": p_bar must be >= m0");
    }
}

} // namespace

void CappedBachelier::validate() const { validate_capped(*this, "capped Bachelier"); }

void CappedBlackScholes::validate() const {
    validate_capped(*this, "capped Black-Scholes");
    if (m0 <= 0.0) {
        throw std::invalid_argument("capped Black-Scholes: m0 must be > 0");
    }
}

void DeterministicDrift::validate() const {
    require_finite(p0, "p0");
    drift.validate();
}

void Martingale::validate() const {
    require_finite(p0, "p0");
    if (!std::isfinite(sigma) || sigma < 0.0) {
        throw std::invalid_argument("martingale: sigma must be >= 0");
    }
}

void validate(const MarketModel& model) {
    std::visit([](const auto& m) { m.validate(); }, model);
}

bool is_capped(const MarketModel& model) {
    return std::holds_alternative<CappedBachelier>(model) ||
           std::holds_alternative<CappedBlackScholes>(model);
}

double initial_price(const MarketModel& model) {
    struct Visitor {
        double operator()(const CappedBachelier& m) const { return m.m0; }
        double operator()(const CappedBlackScholes& m) const { return m.m0; }
        double operator()(const DeterministicDrift& m) const { return m.p0; }
        double operator()(const Martingale& m) const { return m.p0; }
    };
    return std::visit(Visitor{}, model);
}

std::vector<double> drift_increments(const SampledCurve& drift, std::span<const double> grid) {
    drift.validate();
    std::vector<double> increments;
    if (grid.size() < 2) {
        return increments;
    }
    increments.reserve(grid.size() - 1);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = grid[i];
        const double b = grid[i + 1];
        // Trapezoid is exact between consecutive breakpoints of a linear interpolant.
        double total = 0.0;
        double left = a;
        double left_value = drift(a);
        for (double knot : drift.grid) {
            if (knot > a && knot < b) {
                const double value = drift(knot);
                total += 0.5 * (knot - left) * (left_value + value);
                left = knot;
                left_value = value;
            }
        }
        total += 0.5 * (b - left) * (left_value + drift(b));
        increments.push_back(total);
    }
    return increments;
}

} // namespace tzopt
