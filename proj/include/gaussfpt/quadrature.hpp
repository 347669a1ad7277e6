#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace gaussfpt {

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached n-point rule; the reference stays valid for the life of the process. Thread-safe.
const GaussLegendreRule& gauss_legendre(std::size_t n);

/// Fixed n-point Gauss-Legendre on [a, b].
template <class F>
double integrate_gl(F&& f, double a, double b, std::size_t n) {
    const auto& rule = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

struct QuadratureResult {
    double value;
    double error;  ///< estimated absolute error
};

/// Globally adaptive Gauss-Legendre: each panel is scored by the difference between a
/// 10-point rule and two 10-point rules on its halves; the worst panel is split until the
/// summed error estimate drops below max(rel_tol |I|, abs_tol).
/// Throws QuadratureNotConverged after max_panels splits.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol, double abs_tol = 0.0,
                                    std::size_t max_panels = 4096);

}  // namespace gaussfpt
