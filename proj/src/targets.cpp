#include "esvm/targets.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "esvm/error.hpp"
#include "esvm/numerics.hpp"

namespace esvm {

namespace {

class StandardGaussian final : public TargetModel {
public:
    explicit StandardGaussian(std::size_t d) : d_(d) {
        if (d == 0) throw ConfigError("dimension must be positive");
        for (std::size_t i = 0; i < d; ++i) {
            exact_moments_["mean[" + std::to_string(i) + "]"] = 0.0;
            exact_moments_["second_moment[" + std::to_string(i) + "]"] = 1.0;
            exact_moments_["cube[" + std::to_string(i) + "]"] = 0.0;
        }
    }
    std::size_t dim() const override { return d_; }
    double potential(const StateVector& x) const override { return 0.5 * x.squaredNorm(); }
    void gradient_into(const StateVector& x, StateVector& grad) const override { grad = x; }
    std::string label() const override { return "gaussian(d=" + std::to_string(d_) + ")"; }

private:
    std::size_t d_;
};

// Shared covariance, so the Gaussian normalizers cancel inside the log-sum-exp.
class GaussianMixture final : public TargetModel {
public:
    GaussianMixture(double rho, Eigen::VectorXd mu, const Eigen::MatrixXd& sigma) : rho_(rho), mu_(std::move(mu)) {
        const auto d = mu_.size();
        if (d == 0) throw ConfigError("gmm: mean vector is empty");
        if (sigma.rows() != d || sigma.cols() != d) throw ConfigError("gmm: covariance shape does not match mean");
        if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("gmm: rho must lie in [0, 1]");
        if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + sigma.cwiseAbs().maxCoeff()))
            throw ConfigError("gmm: covariance is not symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() != Eigen::Success) throw ConfigError("gmm: covariance is not positive definite");
        precision_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
        precision_mu_ = precision_ * mu_;
        log_w_plus_ = rho_ > 0 ? std::log(rho_) : -std::numeric_limits<double>::infinity();
        log_w_minus_ = rho_ < 1 ? std::log1p(-rho_) : -std::numeric_limits<double>::infinity();
        const Eigen::VectorXd mean = (2.0 * rho_ - 1.0) * mu_;
        for (Eigen::Index i = 0; i < d; ++i) {
            const auto k = std::to_string(i);
            exact_moments_["mean[" + k + "]"] = mean[i];
            exact_moments_["second_moment[" + k + "]"] = sigma(i, i) + mu_[i] * mu_[i];
            exact_moments_["cube[" + k + "]"] = mean[i] * (mu_[i] * mu_[i] + 3.0 * sigma(i, i));
        }
    }

    std::size_t dim() const override { return static_cast<std::size_t>(mu_.size()); }

    double potential(const StateVector& x) const override {
        double lp = 0, lm = 0;
        component_logs(x, lp, lm);
        return -numerics::log_add_exp(lp, lm);
    }

    void gradient_into(const StateVector& x, StateVector& grad) const override { potential_and_gradient(x, grad); }

    double potential_and_gradient(const StateVector& x, StateVector& grad) const override {
        double lp = 0, lm = 0;
        component_logs(x, lp, lm);
        const double lse = numerics::log_add_exp(lp, lm);
        const double r_plus = std::exp(lp - lse);
        const double r_minus = std::exp(lm - lse);
        // grad U = P x - (r+ - r-) P mu
        grad.noalias() = precision_ * x;
        grad -= (r_plus - r_minus) * precision_mu_;
        return -lse;
    }

    std::string label() const override { return "gmm(d=" + std::to_string(mu_.size()) + ")"; }

private:
    void component_logs(const StateVector& x, double& lp, double& lm) const {
        const double quad = x.dot(precision_ * x);
        const double cross = x.dot(precision_mu_);
        const double mpm = mu_.dot(precision_mu_);
        lp = log_w_plus_ - 0.5 * (quad - 2.0 * cross + mpm);
        lm = log_w_minus_ - 0.5 * (quad + 2.0 * cross + mpm);
    }

    double rho_;
    Eigen::VectorXd mu_;
    Eigen::MatrixXd precision_;
    Eigen::VectorXd precision_mu_;
    double log_w_plus_ = 0, log_w_minus_ = 0;
};

class IsolatedMixture final : public TargetModel {
public:
    IsolatedMixture(double rho, double mu1, double sigma1, double mu2, double sigma2)
        : m_{mu1, -mu2}, s_{sigma1, sigma2} {
        if (!(sigma1 > 0) || !(sigma2 > 0)) throw ConfigError("gmm_isolated: standard deviations must be positive");
        if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("gmm_isolated: rho must lie in [0, 1]");
        const double ninf = -std::numeric_limits<double>::infinity();
        logw_[0] = rho > 0 ? std::log(rho) - std::log(sigma1) : ninf;
        logw_[1] = rho < 1 ? std::log1p(-rho) - std::log(sigma2) : ninf;
        const double w[2] = {rho, 1.0 - rho};
        double m1 = 0, m2 = 0, m3 = 0;
        for (int k = 0; k < 2; ++k) {
            const double mu = m_[k], v = s_[k] * s_[k];
            m1 += w[k] * mu;
            m2 += w[k] * (mu * mu + v);
            m3 += w[k] * (mu * mu * mu + 3.0 * mu * v);
        }
        exact_moments_["mean[0]"] = m1;
        exact_moments_["second_moment[0]"] = m2;
        exact_moments_["cube[0]"] = m3;
    }

    std::size_t dim() const override { return 1; }

    double potential(const StateVector& x) const override {
        double l0 = 0, l1 = 0;
        logs(x[0], l0, l1);
        return -numerics::log_add_exp(l0, l1);
    }

    void gradient_into(const StateVector& x, StateVector& grad) const override { potential_and_gradient(x, grad); }

    double potential_and_gradient(const StateVector& x, StateVector& grad) const override {
        double l0 = 0, l1 = 0;
        logs(x[0], l0, l1);
        const double lse = numerics::log_add_exp(l0, l1);
        const double r0 = std::exp(l0 - lse), r1 = std::exp(l1 - lse);
        grad.resize(1);
        grad[0] = r0 * (x[0] - m_[0]) / (s_[0] * s_[0]) + r1 * (x[0] - m_[1]) / (s_[1] * s_[1]);
        return -lse;
    }

    std::string label() const override { return "gmm_isolated"; }

private:
    void logs(double x, double& l0, double& l1) const {
        const double z0 = (x - m_[0]) / s_[0], z1 = (x - m_[1]) / s_[1];
        l0 = logw_[0] - 0.5 * z0 * z0;
        l1 = logw_[1] - 0.5 * z1 * z1;
    }

    double m_[2];
    double s_[2];
    double logw_[2] = {0, 0};
};

class Banana final : public TargetModel {
public:
    Banana(double p, double b, std::size_t d) : p_(p), b_(b), d_(d) {
        if (d < 2) throw ConfigError("banana: dimension must be at least 2");
        if (!(p > 0) || !(b > 0)) throw ConfigError("banana: p and b must be positive");
        exact_moments_["mean[0]"] = 0.0;
        exact_moments_["mean[1]"] = 0.0;
        exact_moments_["second_moment[0]"] = p;
        for (std::size_t k = 2; k < d; ++k) {
            exact_moments_["mean[" + std::to_string(k) + "]"] = 0.0;
            exact_moments_["second_moment[" + std::to_string(k) + "]"] = 1.0;
        }
    }

    std::size_t dim() const override { return d_; }

    double potential(const StateVector& x) const override {
        const double t = x[1] + b_ * x[0] * x[0] - p_ * b_;
        return x[0] * x[0] / (2.0 * p_) + t * t + 0.5 * x.tail(x.size() - 2).squaredNorm();
    }

    void gradient_into(const StateVector& x, StateVector& grad) const override {
        const double t = x[1] + b_ * x[0] * x[0] - p_ * b_;
        grad = x;
        grad[0] = x[0] / p_ + 4.0 * b_ * x[0] * t;
        grad[1] = 2.0 * t;
    }

    std::string label() const override { return "banana(d=" + std::to_string(d_) + ")"; }

private:
    double p_, b_;
    std::size_t d_;
};

}  // namespace

TargetPtr standard_gaussian_target(std::size_t d) { return std::make_shared<StandardGaussian>(d); }

TargetPtr gmm_target(double rho, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
    return std::make_shared<GaussianMixture>(rho, mu, sigma);
}

TargetPtr gmm_isolated_target(double rho, double mu1, double sigma1, double mu2, double sigma2) {
    return std::make_shared<IsolatedMixture>(rho, mu1, sigma1, mu2, sigma2);
}

TargetPtr banana_target(double p, double b, std::size_t d) { return std::make_shared<Banana>(p, b, d); }

// --- regression -------------------------------------------------------------

RegressionTarget::RegressionTarget(Link link, Dataset data, double g) : link_(link), data_(std::move(data)), g_(g) {
    if (!(g > 0)) throw ConfigError("regression: prior scale g must be positive");
    if (data_.train_x.rows() == 0 || data_.train_x.cols() == 0) throw ConfigError("regression: empty training design");
    auto check = [](const Eigen::VectorXd& y) {
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (y[i] != 0.0 && y[i] != 1.0) throw ConfigError("regression: labels must be 0 or 1");
    };
    check(data_.train_y);
    check(data_.test_y);
    y_sign_ = 2.0 * data_.train_y.array() - 1.0;
}

std::string RegressionTarget::label() const {
    return std::string(link_ == Link::Logistic ? "logistic" : "probit") + "(d=" + std::to_string(dim()) + ")";
}

double RegressionTarget::log_likelihood(double y, double z) const {
    if (link_ == Link::Logistic) return y * z - numerics::log1p_exp(z);
    return numerics::log_normal_cdf((2.0 * y - 1.0) * z);
}

double RegressionTarget::potential(const StateVector& x) const {
    const Eigen::VectorXd z = data_.train_x * x;
    double nll = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) nll -= log_likelihood(data_.train_y[i], z[i]);
    return nll + x.squaredNorm() / (2.0 * g_);
}

void RegressionTarget::gradient_into(const StateVector& x, StateVector& grad) const { potential_and_gradient(x, grad); }

double RegressionTarget::potential_and_gradient(const StateVector& x, StateVector& grad) const {
    const Eigen::VectorXd z = data_.train_x * x;
    Eigen::VectorXd dz(z.size());  // d(-loglik)/dz per row
    double nll = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double y = data_.train_y[i];
        if (link_ == Link::Logistic) {
            nll -= y * z[i] - numerics::log1p_exp(z[i]);
            dz[i] = numerics::sigmoid(z[i]) - y;
        } else {
            const double s = y_sign_[i];
            nll -= numerics::log_normal_cdf(s * z[i]);
            dz[i] = -s * numerics::inverse_mills(s * z[i]);
        }
    }
    grad.noalias() = data_.train_x.transpose() * dz;
    grad += x / g_;
    return nll + x.squaredNorm() / (2.0 * g_);
}

double RegressionTarget::test_likelihood(const StateVector& x) const {
    const auto k = data_.test_x.rows();
    if (k == 0) throw ConfigError("regression: no test rows for the likelihood functional");
    const Eigen::VectorXd z = data_.test_x * x;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) sum += std::exp(log_likelihood(data_.test_y[i], z[i]));
    return sum / static_cast<double>(k);
}

std::shared_ptr<const RegressionTarget> logistic_target(Dataset data, double g) {
    return std::make_shared<RegressionTarget>(RegressionTarget::Link::Logistic, std::move(data), g);
}

std::shared_ptr<const RegressionTarget> probit_target(Dataset data, double g) {
    return std::make_shared<RegressionTarget>(RegressionTarget::Link::Probit, std::move(data), g);
}

// --- AR(1) --------------------------------------------------------------------

double ar1_asymptotic_variance(double a) {
    if (!(std::abs(a) < 1.0)) throw ConfigError("ar1: |a| must be < 1");
    return (1.0 / (1.0 - a * a)) * (1.0 + a) / (1.0 - a);
}

Ar1Reference ar1_reference(double a, std::size_t n, SeedKey seed) {
    const double v_inf = ar1_asymptotic_variance(a);
    if (n == 0) throw ConfigError("ar1: n must be positive");
    Rng rng(seed);
    StateMatrix states(static_cast<Eigen::Index>(n), 1);
    double x = rng.normal() / std::sqrt(1.0 - a * a);
    for (std::size_t k = 0; k < n; ++k) {
        states(static_cast<Eigen::Index>(k), 0) = x;
        x = a * x + rng.normal();
    }
    TrajectoryMeta meta;
    meta.sampler = "AR1";
    meta.step_size = a;
    meta.seed = seed;
    return {Trajectory(std::move(states), std::move(meta)), v_inf};
}

}  // namespace esvm
