#pragma once

// Small scalar helpers shared by the targets.

namespace esvm::numerics {

/// log(exp(a) + exp(b)) without overflow; handles -inf arguments.
double log_add_exp(double a, double b);

/// log(1 + exp(z)) without overflow.
double log1p_exp(double z);

double sigmoid(double z);

/// Standard normal density.
double normal_pdf(double z);

/// log of the standard normal CDF, accurate far into the lower tail.
double log_normal_cdf(double z);

/// Inverse Mills ratio phi(z) / Phi(z), accurate far into the lower tail.
double inverse_mills(double z);

/// Below this argument log_normal_cdf and inverse_mills switch from erfc to the continued fraction.
inline constexpr double kNormalTailSwitch = -8.0;

}  // namespace esvm::numerics
