#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace tzopt {

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 32-point Gauss-Legendre nodes and weights on [-1, 1], built once by Newton
/// iteration on the Legendre recurrence.
struct GaussLegendre32 {
    static constexpr std::size_t size = 32;
    std::array<double, size> nodes{};
    std::array<double, size> weights{};

    static const GaussLegendre32& get();
};

/// Composite 32-point Gauss-Legendre on `panels` equal panels of [a, b].
template <class F>
double gauss_legendre_panels(F&& f, double a, double b, std::size_t panels) {
    const auto& rule = GaussLegendre32::get();
    const double width = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
        const double mid = a + (static_cast<double>(k) + 0.5) * width;
        const double half = 0.5 * width;
        double panel = 0.0;
        for (std::size_t i = 0; i < GaussLegendre32::size; ++i) {
            panel += rule.weights[i] * f(mid + half * rule.nodes[i]);
        }
        total += half * panel;
    }
    return total;
}

struct CheckedIntegral {
    double value;   // fine (16-panel) result
    double coarse;  // 8-panel result
};

inline constexpr std::size_t kCoarsePanels = 8;
inline constexpr double kPanelRelTol = 1e-8;

/// Fixed-cost integral with a one-step refinement check: the 8- and 16-panel
/// results must agree to kPanelRelTol relative, or to `abs_floor` absolute.
/// Throws QuadratureError otherwise.
template <class F>
CheckedIntegral checked_integral(F&& f, double a, double b, double abs_floor) {
    const double coarse = gauss_legendre_panels(f, a, b, kCoarsePanels);
    const double fine = gauss_legendre_panels(f, a, b, 2 * kCoarsePanels);
    const double gap = std::abs(fine - coarse);
    if (!std::isfinite(fine) || (gap > kPanelRelTol * std::abs(fine) && gap > abs_floor)) {
        throw QuadratureError("panel refinement disagrees: coarse=" + std::to_string(coarse) +
                              " fine=" + std::to_string(fine));
    }
    return {fine, coarse};
}

} // namespace tzopt
