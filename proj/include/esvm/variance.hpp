#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "esvm/chain.hpp"

namespace esvm {

/// Trapezoid lag kernel on [-1, 1]: 1 on [-1/2, 1/2], linear down to 0 at +-1.
/// Throws ConfigError for |u| > 1.
double trapezoid_kernel(double u);

enum class KernelKind {
    Trapezoid,
    Flat,  // indicator of |u| <= 1/2
};

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

double kernel_value(KernelKind kind, double u);

/// Lag window w_n(s) = w(s / b_n). Only lags |s| < b_n carry weight.
class LagWindow {
public:
    explicit LagWindow(std::size_t truncation, KernelKind kernel = KernelKind::Trapezoid);

    std::size_t truncation() const { return bn_; }
    KernelKind kernel() const { return kernel_; }

    /// w(|s| / b_n) for |s| < b_n, else 0.
    double weight(std::ptrdiff_t s) const;

    /// Weights for lags 0..b_n-1.
    const std::vector<double>& weights() const { return weights_; }

private:
    std::size_t bn_;
    KernelKind kernel_;
    std::vector<double> weights_;
};

/// Smallest b with b^3 >= n, i.e. ceil(n^{1/3}).
std::size_t default_truncation(std::size_t n);

struct SpectralVariance {
    double value = 0.0;
    std::size_t truncation = 0;
    std::size_t n = 0;

    /// max(value, 0); the trapezoid window is not positive definite so tiny negatives occur.
    double clamped() const { return value > 0.0 ? value : 0.0; }
};

/// n^{-1} sum_{k<n-s} (h_k - mean)(h_{k+s} - mean); divisor n for every lag.
double sample_autocovariance(const FunctionalSeries& series, std::size_t lag);

/// sum_{|s|<b_n} w_n(s) R_n(h, |s|), in O(n b_n). Throws "truncation exceeds sample size" when b_n > n.
SpectralVariance spectral_variance(const FunctionalSeries& series, const LagWindow& window);
SpectralVariance spectral_variance(const Eigen::Ref<const Eigen::VectorXd>& values, const LagWindow& window);

/// Unbiased sample variance; requires n >= 2.
double empirical_variance(const FunctionalSeries& series);
double empirical_variance(const Eigen::Ref<const Eigen::VectorXd>& values);

/// R_n(h, s) / R_n(h, 0) for s = 0..max_lag. Throws "degenerate series" when R_n(h, 0) == 0.
std::vector<double> autocorrelation(const FunctionalSeries& series, std::size_t max_lag);

/// z -> W_n z for the banded Toeplitz weight matrix W_n = (w_n(j - i)), matrix-free.
Eigen::VectorXd apply_lag_window(const Eigen::Ref<const Eigen::VectorXd>& z, const LagWindow& window);

/// z -> A_n z with A_n = n^{-1} P W_n P and P the centering projector, matrix-free.
Eigen::VectorXd apply_spectral_operator(const Eigen::Ref<const Eigen::VectorXd>& z, const LagWindow& window);

/// z^T A_n z evaluated as n^{-1} (Pz)^T W_n (Pz). Equals spectral_variance on the same data.
double quadratic_form_apply(const Eigen::Ref<const Eigen::VectorXd>& z, const LagWindow& window);

/// Dense A_n for testing. Refuses n > kDenseOracleLimit.
inline constexpr std::size_t kDenseOracleLimit = 512;
Eigen::MatrixXd weight_matrix_oracle(std::size_t n, const LagWindow& window);

}  // namespace esvm
