#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>

#include "esvm/chain.hpp"
#include "esvm/dataset.hpp"

namespace esvm {

/// Target density pi(x) proportional to exp(-U(x)) with an analytic gradient of U.
class TargetModel {
public:
    virtual ~TargetModel() = default;

    virtual std::size_t dim() const = 0;
    virtual double potential(const StateVector& x) const = 0;
    virtual void gradient_into(const StateVector& x, StateVector& grad) const = 0;
    virtual std::string label() const = 0;

    /// U(x) and grad U(x) in one pass. Targets override when sharing work is cheaper.
    virtual double potential_and_gradient(const StateVector& x, StateVector& grad) const {
        gradient_into(x, grad);
        return potential(x);
    }

    StateVector gradient(const StateVector& x) const {
        StateVector g(static_cast<Eigen::Index>(dim()));
        gradient_into(x, g);
        return g;
    }

    /// Known expectations keyed by functional name, e.g. "mean[0]", "second_moment[0]", "cube[0]".
    const std::map<std::string, double>& exact_moments() const { return exact_moments_; }

protected:
    std::map<std::string, double> exact_moments_;
};

using TargetPtr = std::shared_ptr<const TargetModel>;

/// N(0, I_d); U(x) = |x|^2 / 2.
TargetPtr standard_gaussian_target(std::size_t d);

/// rho N(mu, Sigma) + (1 - rho) N(-mu, Sigma). Throws ConfigError for non-PD Sigma or rho outside [0, 1].
TargetPtr gmm_target(double rho, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);

/// One-dimensional rho N(mu1, sigma1^2) + (1 - rho) N(-mu2, sigma2^2).
TargetPtr gmm_isolated_target(double rho, double mu1, double sigma1, double mu2, double sigma2);

/// U = x1^2/(2p) + (x2 + b x1^2 - p b)^2 + sum_{k>=3} x_k^2 / 2.
TargetPtr banana_target(double p, double b, std::size_t d);

/// Bayesian binary regression posterior on standardized covariates with prior N(0, g I).
class RegressionTarget : public TargetModel {
public:
    enum class Link { Logistic, Probit };

    RegressionTarget(Link link, Dataset data, double g);

    std::size_t dim() const override { return static_cast<std::size_t>(data_.train_x.cols()); }
    double potential(const StateVector& x) const override;
    void gradient_into(const StateVector& x, StateVector& grad) const override;
    double potential_and_gradient(const StateVector& x, StateVector& grad) const override;
    std::string label() const override;

    /// Average likelihood of the held-out rows at parameter x.
    double test_likelihood(const StateVector& x) const;

    /// Log-likelihood contribution of one observation with linear predictor z.
    double log_likelihood(double y, double z) const;

    const Dataset& dataset() const { return data_; }
    Link link() const { return link_; }
    double g() const { return g_; }

private:
    Link link_;
    Dataset data_;
    double g_;
    Eigen::VectorXd y_sign_;  // 2y - 1 per training row
};

std::shared_ptr<const RegressionTarget> logistic_target(Dataset data, double g = 100.0);
std::shared_ptr<const RegressionTarget> probit_target(Dataset data, double g = 100.0);

/// Analytic AR(1) reference chain x_{k+1} = a x_k + z_k started from its stationary law.
struct Ar1Reference {
    Trajectory trajectory;
    double asymptotic_variance;  // exact V_inf for h(x) = x
};

Ar1Reference ar1_reference(double a, std::size_t n, SeedKey seed);

/// (1 + a) / ((1 - a) (1 - a^2)): the long-run variance of h(x) = x for unit innovations.
double ar1_asymptotic_variance(double a);

}  // namespace esvm
