#include "esvm/variance.hpp"

#include <cmath>

#include "esvm/error.hpp"

namespace esvm {

double trapezoid_kernel(double u) {
    if (!(std::abs(u) <= 1.0)) throw ConfigError("trapezoid kernel argument outside [-1, 1]: " + std::to_string(u));
    if (u < -0.5) return 2.0 * u + 2.0;
    if (u <= 0.5) return 1.0;
    return -2.0 * u + 2.0;
}

std::string to_string(KernelKind kind) { return kind == KernelKind::Trapezoid ? "trapezoid" : "flat"; }

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "trapezoid") return KernelKind::Trapezoid;
    if (name == "flat") return KernelKind::Flat;
    throw ConfigError("unknown lag kernel '" + std::string(name) + "'");
}

double kernel_value(KernelKind kind, double u) {
    if (kind == KernelKind::Trapezoid) return trapezoid_kernel(u);
    if (!(std::abs(u) <= 1.0)) throw ConfigError("kernel argument outside [-1, 1]");
    return std::abs(u) <= 0.5 ? 1.0 : 0.0;
}

LagWindow::LagWindow(std::size_t truncation, KernelKind kernel) : bn_(truncation), kernel_(kernel) {
    if (truncation < 1) throw ConfigError("truncation point must be at least 1");
    weights_.resize(bn_);
    for (std::size_t s = 0; s < bn_; ++s)
        weights_[s] = kernel_value(kernel_, static_cast<double>(s) / static_cast<double>(bn_));
}

double LagWindow::weight(std::ptrdiff_t s) const {
    const auto a = static_cast<std::size_t>(s < 0 ? -s : s);
    return a < bn_ ? weights_[a] : 0.0;
}

std::size_t default_truncation(std::size_t n) {
    std::size_t b = static_cast<std::size_t>(std::cbrt(static_cast<double>(n)));
    while (b * b * b < n) ++b;
    while (b > 1 && (b - 1) * (b - 1) * (b - 1) >= n) --b;
    return std::max<std::size_t>(b, 1);
}

namespace {

void require_truncation(std::size_t bn, std::size_t n) {
    if (bn > n) throw ConfigError("truncation exceeds sample size");
}

Eigen::VectorXd centered(const Eigen::Ref<const Eigen::VectorXd>& v) {
    return v.array() - v.mean();
}

// Lag-s cross product of an already centered vector.
double lag_product(const Eigen::VectorXd& c, std::size_t s) {
    const auto m = c.size() - static_cast<Eigen::Index>(s);
    return c.head(m).dot(c.tail(m));
}

}  // namespace

double sample_autocovariance(const FunctionalSeries& series, std::size_t lag) {
    const auto n = series.size();
    if (lag >= n) throw ConfigError("lag " + std::to_string(lag) + " must be smaller than series length " + std::to_string(n));
    return lag_product(centered(series.values), lag) / static_cast<double>(n);
}

SpectralVariance spectral_variance(const Eigen::Ref<const Eigen::VectorXd>& values, const LagWindow& window) {
    const auto n = static_cast<std::size_t>(values.size());
    if (n == 0) throw ConfigError("empty series");
    require_truncation(window.truncation(), n);
    const Eigen::VectorXd c = centered(values);
    const auto& w = window.weights();
    double acc = lag_product(c, 0);
    for (std::size_t s = 1; s < window.truncation(); ++s) {
        if (w[s] != 0.0) acc += 2.0 * w[s] * lag_product(c, s);
    }
    return {acc / static_cast<double>(n), window.truncation(), n};
}

SpectralVariance spectral_variance(const FunctionalSeries& series, const LagWindow& window) {
    return spectral_variance(series.values, window);
}

double empirical_variance(const Eigen::Ref<const Eigen::VectorXd>& values) {
    const auto n = values.size();
    if (n < 2) throw ConfigError("empirical variance needs at least two values");
    return centered(values).squaredNorm() / static_cast<double>(n - 1);
}

double empirical_variance(const FunctionalSeries& series) { return empirical_variance(series.values); }

std::vector<double> autocorrelation(const FunctionalSeries& series, std::size_t max_lag) {
    const auto n = series.size();
    if (max_lag >= n) throw ConfigError("max lag must be smaller than series length");
    const Eigen::VectorXd c = centered(series.values);
    const double r0 = lag_product(c, 0);
    if (r0 == 0.0) throw NumericError("degenerate series");
    std::vector<double> out(max_lag + 1);
    out[0] = 1.0;
    for (std::size_t s = 1; s <= max_lag; ++s) out[s] = lag_product(c, s) / r0;
    return out;
}

Eigen::VectorXd apply_lag_window(const Eigen::Ref<const Eigen::VectorXd>& z, const LagWindow& window) {
    const auto n = z.size();
    require_truncation(window.truncation(), static_cast<std::size_t>(n));
    const auto& w = window.weights();
    Eigen::VectorXd out = w[0] * z;
    for (std::size_t s = 1; s < window.truncation(); ++s) {
        if (w[s] == 0.0) continue;
        const auto m = n - static_cast<Eigen::Index>(s);
        // (W z)_i picks up z_{i+s} and z_{i-s}
        out.head(m) += w[s] * z.tail(m);
        out.tail(m) += w[s] * z.head(m);
    }
    return out;
}

Eigen::VectorXd apply_spectral_operator(const Eigen::Ref<const Eigen::VectorXd>& z, const LagWindow& window) {
    const auto n = static_cast<double>(z.size());
    Eigen::VectorXd wz = apply_lag_window(centered(z), window);
    return centered(wz) / n;
}

double quadratic_form_apply(const Eigen::Ref<const Eigen::VectorXd>& z, const LagWindow& window) {
    if (z.size() == 0) throw ConfigError("empty series");
    const Eigen::VectorXd c = centered(z);
    return c.dot(apply_lag_window(c, window)) / static_cast<double>(z.size());
}

Eigen::MatrixXd weight_matrix_oracle(std::size_t n, const LagWindow& window) {
    if (n > kDenseOracleLimit)
        throw ConfigError("dense weight matrix limited to n <= " + std::to_string(kDenseOracleLimit));
    if (n == 0) throw ConfigError("dense weight matrix needs n >= 1");
    require_truncation(window.truncation(), n);
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd weights(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) weights(i, j) = window.weight(j - i);
    const Eigen::MatrixXd proj =
        Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(n));
    return proj.transpose() * weights * proj / static_cast<double>(n);
}

}  // namespace esvm
