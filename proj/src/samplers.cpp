#include "esvm/samplers.hpp"

#include <cmath>

#include "esvm/error.hpp"

namespace esvm {

std::string to_string(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::ULA: return "ULA";
        case SamplerKind::MALA: return "MALA";
        case SamplerKind::RWM: return "RWM";
    }
    return "?";
}

SamplerKind parse_sampler_kind(std::string_view name) {
    if (name == "ULA" || name == "ula") return SamplerKind::ULA;
    if (name == "MALA" || name == "mala") return SamplerKind::MALA;
    if (name == "RWM" || name == "rwm") return SamplerKind::RWM;
    throw ConfigError("unknown sampler kind '" + std::string(name) + "'");
}

StateVector ula_step(const StateVector& x, const StateVector& grad_u, double gamma, const StateVector& noise) {
    if (noise.size() != x.size() || grad_u.size() != x.size()) throw ConfigError("ula_step: dimension mismatch");
    if (!grad_u.allFinite()) throw NumericError("ula_step: non-finite gradient");
    return x - gamma * grad_u + std::sqrt(2.0 * gamma) * noise;
}

double mala_log_proposal(const StateVector& from, const StateVector& to, const StateVector& grad_from, double gamma) {
    return -(to - from + gamma * grad_from).squaredNorm() / (4.0 * gamma);
}

double mala_log_ratio(const StateVector& x, double u_x, const StateVector& grad_x, const StateVector& y, double u_y,
                      const StateVector& grad_y, double gamma) {
    return (u_x - u_y) + mala_log_proposal(y, x, grad_y, gamma) - mala_log_proposal(x, y, grad_x, gamma);
}

bool metropolis_accept(double log_ratio, double uniform) {
    if (!std::isfinite(log_ratio)) return log_ratio == INFINITY;
    return std::log(uniform) < log_ratio;
}

namespace {

void draw_normals(Rng& rng, StateVector& z) {
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
}

// Per-chain scratch so the hot loop does not allocate.
struct Workspace {
    StateVector z, y, grad_x, grad_y;
    double u_x = 0.0;

    explicit Workspace(Eigen::Index d) : z(d), y(d), grad_x(d), grad_y(d) {}
};

bool mala_transition(StateVector& x, Workspace& w, const TargetModel& target, double gamma, Rng& rng, bool& nonfinite) {
    draw_normals(rng, w.z);
    const double u = rng.uniform();
    w.y = x - gamma * w.grad_x + std::sqrt(2.0 * gamma) * w.z;
    const double u_y = target.potential_and_gradient(w.y, w.grad_y);
    const double log_ratio = mala_log_ratio(x, w.u_x, w.grad_x, w.y, u_y, w.grad_y, gamma);
    nonfinite = !std::isfinite(log_ratio) || !w.grad_y.allFinite();
    if (!nonfinite && metropolis_accept(log_ratio, u)) {
        x.swap(w.y);
        w.grad_x.swap(w.grad_y);
        w.u_x = u_y;
        return true;
    }
    return false;
}

bool rwm_transition(StateVector& x, Workspace& w, const TargetModel& target, double gamma, Rng& rng, bool& nonfinite) {
    draw_normals(rng, w.z);
    const double u = rng.uniform();
    w.y = x + std::sqrt(gamma) * w.z;
    const double u_y = target.potential(w.y);
    const double log_ratio = w.u_x - u_y;
    nonfinite = std::isnan(log_ratio);
    if (!nonfinite && metropolis_accept(log_ratio, u)) {
        x.swap(w.y);
        w.u_x = u_y;
        return true;
    }
    return false;
}

}  // namespace

StepResult mala_step(const StateVector& x, const TargetModel& target, double gamma, Rng& rng) {
    Workspace w(x.size());
    w.u_x = target.potential_and_gradient(x, w.grad_x);
    StepResult r{x, false, false};
    r.accepted = mala_transition(r.state, w, target, gamma, rng, r.nonfinite);
    return r;
}

StepResult rwm_step(const StateVector& x, const TargetModel& target, double gamma, Rng& rng) {
    Workspace w(x.size());
    w.u_x = target.potential(x);
    StepResult r{x, false, false};
    r.accepted = rwm_transition(r.state, w, target, gamma, rng, r.nonfinite);
    return r;
}

ChainResult sample_chain(const SamplerConfig& config, const TargetModel& target, const std::optional<StateVector>& x0) {
    if (!(config.gamma > 0)) throw ConfigError("sampler step size must be positive");
    if (config.n_steps < 1) throw ConfigError("sampler needs at least one step");
    const auto d = static_cast<Eigen::Index>(target.dim());
    StateVector x = x0.value_or(StateVector::Zero(d));
    if (x.size() != d) throw ConfigError("initial state dimension does not match the target");
    if (!x.allFinite()) throw ConfigError("initial state is not finite");

    StateMatrix states(static_cast<Eigen::Index>(config.n_steps), d);
    states.row(0) = x.transpose();

    Rng rng(config.seed);
    Workspace w(d);
    AcceptanceStats stats;
    const double gamma = config.gamma;
    const double noise_scale = std::sqrt(2.0 * gamma);

    if (config.kind == SamplerKind::RWM) w.u_x = target.potential(x);
    else w.u_x = target.potential_and_gradient(x, w.grad_x);

    for (std::size_t k = 1; k < config.n_steps; ++k) {
        bool nonfinite = false;
        switch (config.kind) {
            case SamplerKind::ULA:
                if (!w.grad_x.allFinite())
                    throw NumericError("ULA: non-finite gradient at step " + std::to_string(k - 1));
                draw_normals(rng, w.z);
                x -= gamma * w.grad_x;
                x += noise_scale * w.z;
                if (!x.allFinite()) throw NumericError("ULA: chain diverged at step " + std::to_string(k));
                target.gradient_into(x, w.grad_x);
                ++stats.accepted;
                break;
            case SamplerKind::MALA:
                if (mala_transition(x, w, target, gamma, rng, nonfinite)) ++stats.accepted;
                break;
            case SamplerKind::RWM:
                if (rwm_transition(x, w, target, gamma, rng, nonfinite)) ++stats.accepted;
                break;
        }
        ++stats.proposed;
        if (nonfinite) ++stats.nonfinite;
        states.row(static_cast<Eigen::Index>(k)) = x.transpose();
    }

    TrajectoryMeta meta;
    meta.sampler = to_string(config.kind);
    meta.step_size = gamma;
    meta.seed = config.seed;
    return {Trajectory(std::move(states), std::move(meta)), stats};
}

}  // namespace esvm
