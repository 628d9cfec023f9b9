#include "esvm/numerics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace esvm::numerics {

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log1p_exp(double z) {
    if (z > 0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

namespace {

// Phi(-x) / phi(x) for x >= 8 via the Laplace continued fraction
// 1/(x + 1/(x + 2/(x + 3/(x + ...)))), evaluated bottom-up.
double mills_ratio_upper(double x) {
    double tail = x;
    for (int k = 80; k >= 1; --k) tail = x + k / tail;
    return 1.0 / tail;
}

}  // namespace

double log_normal_cdf(double z) {
    if (z >= kNormalTailSwitch) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
    const double x = -z;
    return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(mills_ratio_upper(x));
}

double inverse_mills(double z) {
    if (z >= kNormalTailSwitch) return normal_pdf(z) / (0.5 * std::erfc(-z / std::numbers::sqrt2));
    return 1.0 / mills_ratio_upper(-z);
}

}  // namespace esvm::numerics
