#include "esvm/optimizer.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "esvm/error.hpp"

namespace esvm {

std::string to_string(Criterion c) { return c == Criterion::ESVM ? "ESVM" : "EVM"; }

Criterion parse_criterion(std::string_view name) {
    if (name == "ESVM" || name == "esvm") return Criterion::ESVM;
    if (name == "EVM" || name == "evm") return Criterion::EVM;
    throw ConfigError("unknown fitting method '" + std::string(name) + "'");
}

std::string to_string(FitMethod m) { return m == FitMethod::LinearSolve ? "LinearSolve" : "QuasiNewton"; }

DesignSet DesignSet::assemble(const SteinFamily& family, const Trajectory& traj, const StateMatrix& grads,
                              Eigen::VectorXd f, const LagWindow& window) {
    if (static_cast<std::size_t>(f.size()) != traj.size()) throw ConfigError("functional length does not match trajectory");
    if (grads.rows() != traj.states().rows() || grads.cols() != traj.states().cols())
        throw ConfigError("gradient matrix does not match trajectory");
    if (window.truncation() > traj.size()) throw ConfigError("truncation exceeds sample size");
    if (!f.allFinite()) throw NumericError("functional values are not finite");
    DesignSet d{std::move(f), family, traj.states(), grads, {}, window};
    if (family.is_linear()) d.psi = feature_matrix(family, d.states, d.grads);
    return d;
}

Eigen::VectorXd DesignSet::control_values(const ThetaVector& theta) const {
    if (static_cast<std::size_t>(theta.size()) != param_count()) throw ConfigError("theta length mismatch");
    if (family.is_linear()) return psi * theta;
    return stein_values(family, theta, states, grads);
}

Eigen::MatrixXd DesignSet::control_jacobian(const ThetaVector& theta) const {
    if (family.is_linear()) return psi;
    return rbf_jacobian(theta, states, grads);
}

ObjectiveValue esvm_objective(const ThetaVector& theta, const DesignSet& design) {
    const Eigen::VectorXd resid = design.f - design.control_values(theta);
    const auto n = static_cast<double>(resid.size());
    const Eigen::VectorXd c = resid.array() - resid.mean();
    Eigen::VectorXd wc = apply_lag_window(c, design.window);
    const double value = c.dot(wc) / n;
    wc.array() -= wc.mean();  // A r = P W P r / n
    ObjectiveValue out{value, -2.0 / n * (design.control_jacobian(theta).transpose() * wc)};
    return out;
}

ObjectiveValue evm_objective(const ThetaVector& theta, const DesignSet& design) {
    const Eigen::VectorXd resid = design.f - design.control_values(theta);
    const auto n = resid.size();
    if (n < 2) throw ConfigError("empirical variance needs at least two values");
    const Eigen::VectorXd c = resid.array() - resid.mean();
    const double scale = 1.0 / static_cast<double>(n - 1);
    return {c.squaredNorm() * scale, -2.0 * scale * (design.control_jacobian(theta).transpose() * c)};
}

ObjectiveValue objective(const ThetaVector& theta, const DesignSet& design, Criterion criterion) {
    return criterion == Criterion::ESVM ? esvm_objective(theta, design) : evm_objective(theta, design);
}

// --- quasi-Newton ---------------------------------------------------------------

FitResult fit_quasi_newton(const ObjectiveFn& fn, const ThetaVector& theta0, const QuasiNewtonConfig& config) {
    FitResult res;
    res.method = FitMethod::QuasiNewton;
    ThetaVector x = theta0;
    ObjectiveValue cur = fn(x);
    if (!std::isfinite(cur.value) || !cur.gradient.allFinite())
        throw NumericError("objective is not finite at the starting point");

    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> mem;  // (s, y) pairs
    auto small_gradient = [&](const ObjectiveValue& v) {
        return v.gradient.size() == 0 || v.gradient.cwiseAbs().maxCoeff() <= config.grad_tol * (1.0 + std::abs(v.value));
    };

    std::size_t it = 0;
    bool converged = small_gradient(cur);
    while (!converged && it < config.max_iter) {
        // two-loop recursion
        Eigen::VectorXd q = cur.gradient;
        std::vector<double> alpha(mem.size());
        for (std::size_t i = mem.size(); i-- > 0;) {
            const auto& [s, y] = mem[i];
            alpha[i] = s.dot(q) / y.dot(s);
            q -= alpha[i] * y;
        }
        if (!mem.empty()) {
            const auto& [s, y] = mem.back();
            q *= s.dot(y) / y.squaredNorm();
        } else {
            q /= std::max(1.0, cur.gradient.cwiseAbs().maxCoeff());
        }
        for (std::size_t i = 0; i < mem.size(); ++i) {
            const auto& [s, y] = mem[i];
            const double beta = y.dot(q) / y.dot(s);
            q += (alpha[i] - beta) * s;
        }
        Eigen::VectorXd dir = -q;
        double slope = cur.gradient.dot(dir);
        if (!(slope < 0.0)) {  // not a descent direction: restart from steepest descent
            mem.clear();
            dir = -cur.gradient / std::max(1.0, cur.gradient.cwiseAbs().maxCoeff());
            slope = cur.gradient.dot(dir);
        }

        double step = 1.0;
        bool accepted = false;
        ObjectiveValue next;
        ThetaVector x_new;
        for (int bt = 0; bt < 60; ++bt) {
            x_new = x + step * dir;
            next = fn(x_new);
            if (std::isfinite(next.value) && next.gradient.allFinite() &&
                next.value <= cur.value + config.sufficient_decrease * step * slope) {
                accepted = true;
                break;
            }
            step *= config.backtrack;
        }
        ++it;
        if (!accepted) break;

        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd y = next.gradient - cur.gradient;
        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            mem.emplace_back(std::move(s), std::move(y));
            if (mem.size() > config.history) mem.pop_front();
        }
        const double prev = cur.value;
        x = std::move(x_new);
        cur = std::move(next);
        converged = small_gradient(cur);
        // No representable progress left.
        if (!converged && prev - cur.value <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(prev)) {
            if (mem.empty()) break;
            mem.clear();  // retry from steepest descent before giving up
        }
    }
    res.theta = std::move(x);
    res.objective_at_theta = cur.value;
    res.iterations = it;
    res.converged = converged;
    return res;
}

// --- linear path -------------------------------------------------------------------

namespace {

Eigen::MatrixXd apply_criterion_operator(const Eigen::MatrixXd& cols, const DesignSet& design, Criterion criterion) {
    Eigen::MatrixXd out(cols.rows(), cols.cols());
    const auto n = cols.rows();
    for (Eigen::Index j = 0; j < cols.cols(); ++j) {
        if (criterion == Criterion::ESVM) {
            out.col(j) = apply_spectral_operator(cols.col(j), design.window);
        } else {
            out.col(j) = (cols.col(j).array() - cols.col(j).mean()) / static_cast<double>(n - 1);
        }
    }
    return out;
}

}  // namespace

FitResult solve_linear(const DesignSet& design, Criterion criterion, std::optional<double> ridge,
                       const QuasiNewtonConfig& qn) {
    if (!design.family.is_linear()) throw ConfigError("linear solve requires a polynomial Stein family");
    const auto p = static_cast<Eigen::Index>(design.param_count());
    const ThetaVector zero = ThetaVector::Zero(p);
    const double obj0 = objective(zero, design, criterion).value;
    auto fn = [&](const ThetaVector& t) { return objective(t, design, criterion); };

    const Eigen::MatrixXd m_psi = apply_criterion_operator(design.psi, design, criterion);
    Eigen::MatrixXd h = design.psi.transpose() * m_psi;
    h = 0.5 * (h + h.transpose());
    const Eigen::VectorXd rhs = m_psi.transpose() * design.f;  // M symmetric
    const double lambda = ridge.value_or(1e-8 * h.trace() / static_cast<double>(p));
    h.diagonal().array() += lambda;

    auto fallback = [&](std::string why) {
        FitResult r = fit_quasi_newton(fn, zero, qn);
        r.objective_at_zero = obj0;
        r.note = std::move(why);
        return r;
    };

    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    const Eigen::VectorXd piv = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || piv.size() == 0 || !(piv.minCoeff() > 1e-13 * piv.maxCoeff()))
        return fallback("normal equations singular");
    ThetaVector theta = ldlt.solve(rhs);
    if (!theta.allFinite()) return fallback("linear solve produced non-finite parameters");

    const double obj = objective(theta, design, criterion).value;
    if (!(obj <= obj0 + 1e-9 * std::abs(obj0))) return fallback("stationary point does not decrease the objective");

    FitResult r;
    r.theta = std::move(theta);
    r.objective_at_theta = obj;
    r.objective_at_zero = obj0;
    r.method = FitMethod::LinearSolve;
    r.iterations = 1;
    r.converged = true;
    return r;
}

FitResult fit(const DesignSet& design, Criterion criterion, const QuasiNewtonConfig& qn) {
    if (design.family.is_linear()) return solve_linear(design, criterion, std::nullopt, qn);
    const ThetaVector theta0 = rbf_initial_theta(design.family.centers(), design.states);
    const double obj0 = objective(ThetaVector::Zero(theta0.size()), design, criterion).value;
    FitResult r = fit_quasi_newton([&](const ThetaVector& t) { return objective(t, design, criterion); }, theta0, qn);
    r.objective_at_zero = obj0;
    return r;
}

}  // namespace esvm
