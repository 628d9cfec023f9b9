#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "esvm/chain.hpp"
#include "esvm/samplers.hpp"
#include "esvm/targets.hpp"

namespace esvm {

/// Parametric vector field Phi_theta inducing the Stein control variate
/// g_theta(x) = -<Phi_theta(x), grad U(x)> + div Phi_theta(x).
///
/// Parameter layouts:
///   FirstOrder   Phi = b                      theta = (b_1..b_d)
///   SecondOrder  Phi = A x + b                theta = (b_1..b_d | A row-major)
///   Rbf (d = 1)  Phi = sum_k a_k (x - c_k) exp(-(x - c_k)^2 / 2)
///                                             theta = (a_1..a_r | c_1..c_r)
class SteinFamily {
public:
    enum class Kind { FirstOrder, SecondOrder, Rbf };

    static SteinFamily first_order(std::size_t d);
    static SteinFamily second_order(std::size_t d);
    static SteinFamily rbf(std::size_t r);

    Kind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    std::size_t centers() const { return r_; }
    std::size_t param_count() const;
    bool is_linear() const { return kind_ != Kind::Rbf; }

    friend bool operator==(const SteinFamily&, const SteinFamily&) = default;

private:
    SteinFamily(Kind kind, std::size_t dim, std::size_t r) : kind_(kind), dim_(dim), r_(r) {}

    Kind kind_;
    std::size_t dim_;
    std::size_t r_;
};

std::string to_string(SteinFamily::Kind kind);
SteinFamily::Kind parse_family_kind(std::string_view name);

/// Parameters of a Stein family; finite, length == family.param_count().
using ThetaVector = Eigen::VectorXd;

double stein_value(const SteinFamily& family, const ThetaVector& theta, const StateVector& x, const StateVector& grad_u);

/// psi(x) with g_theta(x) = <theta, psi(x)>. Polynomial families only.
Eigen::VectorXd feature_row(const SteinFamily& family, const StateVector& x, const StateVector& grad_u);

/// d g / d theta for the RBF family at a single point (length 2r).
Eigen::VectorXd rbf_gradient(const ThetaVector& theta, double x, double grad_u);

// Batched over a trajectory; rows of `states` and `grads` are aligned.
Eigen::MatrixXd feature_matrix(const SteinFamily& family, const StateMatrix& states, const StateMatrix& grads);
Eigen::VectorXd stein_values(const SteinFamily& family, const ThetaVector& theta, const StateMatrix& states,
                             const StateMatrix& grads);
/// n x 2r Jacobian of g_theta(X_k) with respect to theta (RBF only).
Eigen::MatrixXd rbf_jacobian(const ThetaVector& theta, const StateMatrix& states, const StateMatrix& grads);

/// grad U evaluated at every state, one row per state.
StateMatrix gradient_matrix(const TargetModel& target, const Trajectory& traj);

/// Starting point for RBF fits: a = 0, centers at the k/(r+1) empirical quantiles of the 1-d states.
ThetaVector rbf_initial_theta(std::size_t r, const StateMatrix& states);

/// mean(g) / SE(g) on a fresh chain, SE from the spectral variance with the default truncation.
/// Returns 0 when g vanishes identically.
double zero_mean_check(const SteinFamily& family, const ThetaVector& theta, const TargetModel& target,
                       const SamplerConfig& sampler);

}  // namespace esvm
