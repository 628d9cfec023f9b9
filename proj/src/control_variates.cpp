#include "esvm/control_variates.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "esvm/error.hpp"
#include "esvm/variance.hpp"

namespace esvm {

SteinFamily SteinFamily::first_order(std::size_t d) {
    if (d == 0) throw ConfigError("Stein family dimension must be positive");
    return {Kind::FirstOrder, d, 0};
}

SteinFamily SteinFamily::second_order(std::size_t d) {
    if (d == 0) throw ConfigError("Stein family dimension must be positive");
    return {Kind::SecondOrder, d, 0};
}

SteinFamily SteinFamily::rbf(std::size_t r) {
    if (r == 0) throw ConfigError("RBF family needs at least one center");
    return {Kind::Rbf, 1, r};
}

std::size_t SteinFamily::param_count() const {
    switch (kind_) {
        case Kind::FirstOrder: return dim_;
        case Kind::SecondOrder: return dim_ + dim_ * dim_;
        case Kind::Rbf: return 2 * r_;
    }
    return 0;
}

std::string to_string(SteinFamily::Kind kind) {
    switch (kind) {
        case SteinFamily::Kind::FirstOrder: return "first_order";
        case SteinFamily::Kind::SecondOrder: return "second_order";
        case SteinFamily::Kind::Rbf: return "rbf";
    }
    return "?";
}

SteinFamily::Kind parse_family_kind(std::string_view name) {
    if (name == "first_order") return SteinFamily::Kind::FirstOrder;
    if (name == "second_order") return SteinFamily::Kind::SecondOrder;
    if (name == "rbf") return SteinFamily::Kind::Rbf;
    throw ConfigError("unknown control variate family '" + std::string(name) + "'");
}

namespace {

void check_shapes(const SteinFamily& family, const ThetaVector* theta, const StateVector& x, const StateVector& grad_u) {
    if (theta && static_cast<std::size_t>(theta->size()) != family.param_count())
        throw ConfigError("theta has length " + std::to_string(theta->size()) + ", family expects " +
                          std::to_string(family.param_count()));
    if (static_cast<std::size_t>(x.size()) != family.dim() || grad_u.size() != x.size())
        throw ConfigError("state dimension does not match the control variate family");
    if (!grad_u.allFinite()) throw NumericError("non-finite gradient passed to the control variate");
}

double rbf_value(const ThetaVector& theta, double x, double grad_u) {
    const auto r = theta.size() / 2;
    double g = 0.0;
    for (Eigen::Index k = 0; k < r; ++k) {
        const double t = x - theta[r + k];
        const double e = std::exp(-0.5 * t * t);
        g += theta[k] * e * (1.0 - t * t - t * grad_u);
    }
    return g;
}

}  // namespace

double stein_value(const SteinFamily& family, const ThetaVector& theta, const StateVector& x, const StateVector& grad_u) {
    check_shapes(family, &theta, x, grad_u);
    const auto d = x.size();
    switch (family.kind()) {
        case SteinFamily::Kind::FirstOrder:
            return -theta.dot(grad_u);
        case SteinFamily::Kind::SecondOrder: {
            const auto a = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                theta.data() + d, d, d);
            const Eigen::VectorXd phi = a * x + theta.head(d);
            return -phi.dot(grad_u) + a.trace();
        }
        case SteinFamily::Kind::Rbf:
            return rbf_value(theta, x[0], grad_u[0]);
    }
    return 0.0;
}

Eigen::VectorXd feature_row(const SteinFamily& family, const StateVector& x, const StateVector& grad_u) {
    if (!family.is_linear()) throw ConfigError("family not linear in all parameters");
    check_shapes(family, nullptr, x, grad_u);
    const auto d = x.size();
    Eigen::VectorXd psi(static_cast<Eigen::Index>(family.param_count()));
    psi.head(d) = -grad_u;
    if (family.kind() == SteinFamily::Kind::SecondOrder) {
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) psi[d + i * d + j] = -x[j] * grad_u[i] + (i == j ? 1.0 : 0.0);
    }
    return psi;
}

Eigen::VectorXd rbf_gradient(const ThetaVector& theta, double x, double grad_u) {
    if (theta.size() % 2 != 0 || theta.size() == 0) throw ConfigError("RBF theta must hold (a, c) pairs");
    const auto r = theta.size() / 2;
    Eigen::VectorXd out(theta.size());
    for (Eigen::Index k = 0; k < r; ++k) {
        const double t = x - theta[r + k];
        const double e = std::exp(-0.5 * t * t);
        const double q = 1.0 - t * t - t * grad_u;  // basis response is e * q
        out[k] = e * q;
        // d/dc = -d/dt, and d/dt (e q) = e (q' - t q) with q' = -2t - grad_u
        out[r + k] = -theta[k] * e * (-2.0 * t - grad_u - t * q);
    }
    return out;
}

Eigen::MatrixXd feature_matrix(const SteinFamily& family, const StateMatrix& states, const StateMatrix& grads) {
    if (!family.is_linear()) throw ConfigError("family not linear in all parameters");
    if (states.rows() != grads.rows() || states.cols() != grads.cols()) throw ConfigError("states and gradients misaligned");
    const auto n = states.rows();
    const auto d = states.cols();
    if (static_cast<std::size_t>(d) != family.dim()) throw ConfigError("state dimension does not match the family");
    if (!grads.allFinite()) throw NumericError("non-finite gradient in feature assembly");
    Eigen::MatrixXd psi(n, static_cast<Eigen::Index>(family.param_count()));
    psi.leftCols(d) = -grads;
    if (family.kind() == SteinFamily::Kind::SecondOrder) {
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) {
                psi.col(d + i * d + j) = -(states.col(j).array() * grads.col(i).array());
                if (i == j) psi.col(d + i * d + j).array() += 1.0;
            }
    }
    return psi;
}

Eigen::VectorXd stein_values(const SteinFamily& family, const ThetaVector& theta, const StateMatrix& states,
                             const StateMatrix& grads) {
    if (static_cast<std::size_t>(theta.size()) != family.param_count()) throw ConfigError("theta length mismatch");
    if (family.is_linear()) return feature_matrix(family, states, grads) * theta;
    if (states.cols() != 1) throw ConfigError("RBF family is one-dimensional");
    Eigen::VectorXd g(states.rows());
    for (Eigen::Index k = 0; k < states.rows(); ++k) g[k] = rbf_value(theta, states(k, 0), grads(k, 0));
    return g;
}

Eigen::MatrixXd rbf_jacobian(const ThetaVector& theta, const StateMatrix& states, const StateMatrix& grads) {
    if (states.cols() != 1) throw ConfigError("RBF family is one-dimensional");
    Eigen::MatrixXd jac(states.rows(), theta.size());
    for (Eigen::Index k = 0; k < states.rows(); ++k) jac.row(k) = rbf_gradient(theta, states(k, 0), grads(k, 0)).transpose();
    return jac;
}

StateMatrix gradient_matrix(const TargetModel& target, const Trajectory& traj) {
    const auto n = static_cast<Eigen::Index>(traj.size());
    const auto d = static_cast<Eigen::Index>(traj.dim());
    if (static_cast<std::size_t>(d) != target.dim()) throw ConfigError("trajectory dimension does not match target");
    StateMatrix grads(n, d);
    StateVector x(d), g(d);
    for (Eigen::Index k = 0; k < n; ++k) {
        x = traj.states().row(k).transpose();
        target.gradient_into(x, g);
        if (!g.allFinite()) throw NumericError("non-finite gradient at state index " + std::to_string(k));
        grads.row(k) = g.transpose();
    }
    return grads;
}

ThetaVector rbf_initial_theta(std::size_t r, const StateMatrix& states) {
    if (states.cols() != 1) throw ConfigError("RBF family is one-dimensional");
    if (states.rows() == 0) throw ConfigError("no states for RBF initialization");
    std::vector<double> v(states.data(), states.data() + states.rows());
    std::sort(v.begin(), v.end());
    ThetaVector theta = ThetaVector::Zero(static_cast<Eigen::Index>(2 * r));
    const double last = static_cast<double>(v.size() - 1);
    for (std::size_t k = 1; k <= r; ++k) {
        const double pos = last * static_cast<double>(k) / static_cast<double>(r + 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        theta[static_cast<Eigen::Index>(r + k - 1)] = v[lo] + frac * (v[hi] - v[lo]);
    }
    return theta;
}

double zero_mean_check(const SteinFamily& family, const ThetaVector& theta, const TargetModel& target,
                       const SamplerConfig& sampler) {
    if (static_cast<std::size_t>(theta.size()) != family.param_count()) throw ConfigError("theta length mismatch");
    const bool vanishes = family.kind() == SteinFamily::Kind::Rbf
                              ? theta.head(static_cast<Eigen::Index>(family.centers())).isZero(0.0)
                              : theta.isZero(0.0);
    if (vanishes) return 0.0;
    const auto chain = sample_chain(sampler, target);
    const auto grads = gradient_matrix(target, chain.trajectory);
    const Eigen::VectorXd g = stein_values(family, theta, chain.trajectory.states(), grads);
    const auto n = static_cast<std::size_t>(g.size());
    const auto sv = spectral_variance(g, LagWindow(default_truncation(n)));
    const double se = std::sqrt(sv.clamped() / static_cast<double>(n));
    const double mean = g.mean();
    if (se == 0.0) return mean == 0.0 ? 0.0 : std::copysign(INFINITY, mean);
    return mean / se;
}

}  // namespace esvm
