#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "esvm/chain.hpp"
#include "esvm/rng.hpp"
#include "esvm/targets.hpp"

namespace esvm {

enum class SamplerKind { ULA, MALA, RWM };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(std::string_view name);

struct SamplerConfig {
    SamplerKind kind = SamplerKind::ULA;
    double gamma = 0.1;
    std::size_t n_steps = 1;
    SeedKey seed;
};

struct AcceptanceStats {
    std::size_t proposed = 0;
    std::size_t accepted = 0;
    std::size_t nonfinite = 0;  // proposals rejected because the log-ratio was not finite

    double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

/// x - gamma * grad + sqrt(2 gamma) * noise. Throws NumericError on a non-finite gradient.
StateVector ula_step(const StateVector& x, const StateVector& grad_u, double gamma, const StateVector& noise);

/// log q_gamma(from, to) up to the shared normalizer: -|to - from + gamma grad_u(from)|^2 / (4 gamma).
double mala_log_proposal(const StateVector& from, const StateVector& to, const StateVector& grad_from, double gamma);

/// log of the MALA Metropolis-Hastings ratio pi(y) q(y, x) / (pi(x) q(x, y)).
double mala_log_ratio(const StateVector& x, double u_x, const StateVector& grad_x, const StateVector& y, double u_y,
                      const StateVector& grad_y, double gamma);

/// Result of one Metropolis step.
struct StepResult {
    StateVector state;
    bool accepted = false;
    bool nonfinite = false;
};

/// One MALA transition. Consumes d normals then one uniform regardless of the outcome.
StepResult mala_step(const StateVector& x, const TargetModel& target, double gamma, Rng& rng);

/// One RWM transition with proposal x + sqrt(gamma) z. Same RNG consumption as mala_step.
StepResult rwm_step(const StateVector& x, const TargetModel& target, double gamma, Rng& rng);

/// Accept/reject in log space: true iff log(uniform) < log_ratio. A non-finite ratio rejects.
bool metropolis_accept(double log_ratio, double uniform);

struct ChainResult {
    Trajectory trajectory;
    AcceptanceStats stats;
};

/// Runs n_steps - 1 transitions from x0 (state 0 is x0). x0 defaults to the origin.
ChainResult sample_chain(const SamplerConfig& config, const TargetModel& target,
                         const std::optional<StateVector>& x0 = std::nullopt);

}  // namespace esvm
