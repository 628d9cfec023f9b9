#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "esvm/rng.hpp"

namespace esvm {

using StateVector = Eigen::VectorXd;
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Provenance carried along with a trajectory.
struct TrajectoryMeta {
    std::string sampler;  // "ULA", "MALA", "RWM", "AR1", or "" when unknown
    double step_size = 0.0;
    SeedKey seed;
    bool burn_in_removed = false;
    std::size_t burn_in = 0;

    friend bool operator==(const TrajectoryMeta&, const TrajectoryMeta&) = default;
};

/// Immutable sequence of n states of dimension d, stored row-major (one state per row).
class Trajectory {
public:
    Trajectory(StateMatrix states, TrajectoryMeta meta);

    std::size_t size() const { return static_cast<std::size_t>(states_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(states_.cols()); }
    const StateMatrix& states() const { return states_; }
    auto state(std::size_t k) const { return states_.row(static_cast<Eigen::Index>(k)); }
    const TrajectoryMeta& meta() const { return meta_; }

    friend bool operator==(const Trajectory& a, const Trajectory& b) {
        return a.meta_ == b.meta_ && a.states_.rows() == b.states_.rows() &&
               a.states_.cols() == b.states_.cols() && a.states_ == b.states_;
    }

private:
    StateMatrix states_;
    TrajectoryMeta meta_;
};

/// Values h(X_0), ..., h(X_{n-1}) of a scalar functional along a trajectory.
struct FunctionalSeries {
    Eigen::VectorXd values;

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

using ScalarFunction = std::function<double(const StateVector&)>;

double ergodic_average(const FunctionalSeries& series);

/// Drops the first n_burn states. Throws ConfigError when n_burn >= n.
Trajectory split_burn_in(const Trajectory& traj, std::size_t n_burn);

/// Applies f to every state in order; throws NumericError naming the first index with a non-finite value.
FunctionalSeries evaluate(const ScalarFunction& f, const Trajectory& traj);

// Persistence. The binary layout is a 16-byte header (magic "ESVMTRAJ", u32 dim, u32 reserved)
// followed by n*d little-endian doubles, row-major. Metadata lives in "<path>.json".
void write_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_trajectory(const std::filesystem::path& path);
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace esvm
