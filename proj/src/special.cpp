#include "gaussfpt/special.hpp"

#include <cmath>
#include <numbers>

namespace gaussfpt {

namespace {

constexpr double kContinuedFractionCutoff = 8.0;

// Tail K of sqrt(pi) e^{y^2} erfc(y) = 1 / (y + K), K = (1/2)/(y + (2/2)/(y + (3/2)/(y + ...))).
double erfc_fraction_tail(double y) {
    double k = 0.0;
    for (int j = 60; j >= 1; --j) k = (0.5 * j) / (y + k);
    return k;
}

}  // namespace

double a_function(double y) {
    if (y > kContinuedFractionCutoff) {
        const double k = erfc_fraction_tail(y);
        return std::exp(-y * y) * k / (y + k);
    }
    return std::exp(-y * y) - std::sqrt(std::numbers::pi) * y * std::erfc(y);
}

}  // namespace gaussfpt
