#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "esvm/control_variates.hpp"
#include "esvm/variance.hpp"

namespace esvm {

/// Training criterion: spectral variance (ESVM) or plain sample variance (EVM).
enum class Criterion { ESVM, EVM };

std::string to_string(Criterion c);
Criterion parse_criterion(std::string_view name);

/// Training problem: functional values F along the chain, the Stein family evaluated on the same
/// states, and the lag window used by the spectral criterion.
struct DesignSet {
    Eigen::VectorXd f;
    SteinFamily family;
    StateMatrix states;
    StateMatrix grads;
    Eigen::MatrixXd psi;  // n x p feature matrix; empty for the RBF family
    LagWindow window;

    static DesignSet assemble(const SteinFamily& family, const Trajectory& traj, const StateMatrix& grads,
                              Eigen::VectorXd f, const LagWindow& window);

    std::size_t size() const { return static_cast<std::size_t>(f.size()); }
    std::size_t param_count() const { return family.param_count(); }

    /// g_theta at every training state.
    Eigen::VectorXd control_values(const ThetaVector& theta) const;
    /// d g_theta / d theta at every training state (n x p).
    Eigen::MatrixXd control_jacobian(const ThetaVector& theta) const;
};

struct ObjectiveValue {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// V_n(F - g_theta) and its gradient -2 J^T A_n (F - g_theta), matrix-free.
ObjectiveValue esvm_objective(const ThetaVector& theta, const DesignSet& design);

/// V'_n(F - g_theta) and its gradient -2/(n-1) J^T P (F - g_theta).
ObjectiveValue evm_objective(const ThetaVector& theta, const DesignSet& design);

ObjectiveValue objective(const ThetaVector& theta, const DesignSet& design, Criterion criterion);

enum class FitMethod { LinearSolve, QuasiNewton };
std::string to_string(FitMethod m);

struct FitResult {
    ThetaVector theta;
    double objective_at_theta = 0.0;
    double objective_at_zero = 0.0;
    FitMethod method = FitMethod::LinearSolve;
    std::size_t iterations = 0;
    bool converged = false;
    std::string note;  // why a fallback happened, if one did
};

struct QuasiNewtonConfig {
    std::size_t max_iter = 500;
    double grad_tol = 1e-8;
    std::size_t history = 10;
    double backtrack = 0.5;
    double sufficient_decrease = 1e-4;
};

/// Value and gradient at theta.
using ObjectiveFn = std::function<ObjectiveValue(const ThetaVector&)>;

/// Limited-memory BFGS with Armijo backtracking. Stops when |grad|_inf <= grad_tol (1 + |value|)
/// or after max_iter iterations; a line search that cannot make progress returns the best point
/// with converged = false.
FitResult fit_quasi_newton(const ObjectiveFn& fn, const ThetaVector& theta0, const QuasiNewtonConfig& config = {});

/// Solves (Psi^T M Psi + ridge I) theta = Psi^T M F, M the criterion's operator. ridge defaults to
/// 1e-8 trace(Psi^T M Psi) / p. Falls back to quasi-Newton from zero when the system is singular or
/// the stationary point does not decrease the objective.
FitResult solve_linear(const DesignSet& design, Criterion criterion, std::optional<double> ridge = std::nullopt,
                       const QuasiNewtonConfig& qn = {});

/// Dispatch: linear solve for polynomial families, quasi-Newton from the quantile-center start for RBF.
FitResult fit(const DesignSet& design, Criterion criterion, const QuasiNewtonConfig& qn = {});

}  // namespace esvm
