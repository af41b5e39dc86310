#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace tmsdyn::quadrature {

inline constexpr double kDefaultTolerance = 1e-13;
inline constexpr unsigned kMaxDepth = 20;

/// Adaptive Gauss-Kronrod on [a, b], split at every breakpoint inside the interval.
/// Returns 0 for an empty or reversed interval.
template <typename F>
double integrate(F&& f, double a, double b, std::span<const double> breakpoints = {},
                 double tol = kDefaultTolerance) {
    if (!(b > a)) return 0.0;
    std::vector<double> knots{a};
    for (double x : breakpoints)
        if (x > a && x < b) knots.push_back(x);
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());

    double total = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        if (knots[k + 1] <= knots[k]) continue;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            f, knots[k], knots[k + 1], kMaxDepth, tol);
    }
    return total;
}

/// Composite 20-point Gauss-Legendre for vector-valued integrands (any type with
/// `+`, scalar `*` and a zero produced by `zero`). Panels never straddle a breakpoint
/// and are at most `max_panel` wide.
template <typename Vec, typename F>
Vec integrate_composite(F&& f, double a, double b, Vec zero, double max_panel,
                        std::span<const double> breakpoints = {}) {
    using Rule = boost::math::quadrature::gauss<double, 20>;
    Vec total = zero;
    if (!(b > a)) return total;

    std::vector<double> knots{a};
    for (double x : breakpoints)
        if (x > a && x < b) knots.push_back(x);
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());

    const auto& abscissa = Rule::abscissa();
    const auto& weights = Rule::weights();
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double lo = knots[k];
        const double hi = knots[k + 1];
        if (hi <= lo) continue;
        const auto panels = static_cast<std::size_t>(std::ceil((hi - lo) / max_panel));
        const double width = (hi - lo) / static_cast<double>(std::max<std::size_t>(panels, 1));
        for (std::size_t p = 0; p < std::max<std::size_t>(panels, 1); ++p) {
            const double left = lo + width * static_cast<double>(p);
            const double mid = left + 0.5 * width;
            const double half = 0.5 * width;
            // Boost stores the non-negative half of a symmetric rule.
            for (std::size_t j = 0; j < abscissa.size(); ++j) {
                const double x = abscissa[j];
                const double w = weights[j] * half;
                if (x == 0.0) {
                    total = total + w * f(mid);
                } else {
                    total = total + w * f(mid - half * x);
                    total = total + w * f(mid + half * x);
                }
            }
        }
    }
    return total;
}

}  // namespace tmsdyn::quadrature
