#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "esvm/config.hpp"
#include "esvm/optimizer.hpp"
#include "esvm/report.hpp"

namespace esvm {

/// Burned-in training chain with the functional and gradients evaluated on it.
struct TrainingData {
    Trajectory chain;
    AcceptanceStats stats;
    Eigen::VectorXd f;
    StateMatrix grads;
};

struct FittedControl {
    std::string label;
    Criterion criterion = Criterion::ESVM;
    SteinFamily family = SteinFamily::first_order(1);
    FitResult fit;
    std::size_t bn_train = 0;
};

FittedTheta to_fitted_theta(const FittedControl& control);
FitSummary to_fit_summary(const FittedControl& control);
/// Rebuilds a control from its report entry (family + params), e.g. for the `evaluate` subcommand.
FittedControl control_from_report(const MethodReport& method);

/// Outcome of one VRF ratio.
struct VrfValue {
    double value = 0.0;
    bool infinite = false;
};

inline constexpr double kVrfDenominatorFloor = 1e-300;

/// V_n(f) / V_n(h) on the same trajectory, with both variances clamped at zero; a denominator
/// below kVrfDenominatorFloor is flagged infinite.
VrfValue vrf(const FunctionalSeries& f, const FunctionalSeries& h, const LagWindow& window);

/// Normalized sample autocorrelations for lags 0..max_lag.
std::vector<double> acf_dump(const FunctionalSeries& series, std::size_t max_lag);

/// Binds a config to its target, functional and Stein family.
class Experiment {
public:
    explicit Experiment(ExperimentConfig config);

    const ExperimentConfig& config() const { return config_; }
    const TargetPtr& target() const { return target_; }
    const ScalarFunction& functional() const { return functional_; }
    const SteinFamily& family() const { return family_; }
    std::optional<double> exact_value() const;

    /// Chain on stream `stream` with n_burn + n states, burn-in dropped.
    ChainResult sample(std::uint32_t stream, std::size_t n) const;

    TrainingData training_data() const;
    DesignSet design(const TrainingData& train, std::size_t bn) const;
    FittedControl fit_control(const TrainingData& train, Criterion criterion, std::size_t bn, std::string label) const;
    /// One control per configured method, using the configured bn.
    std::vector<FittedControl> fit_all(const TrainingData& train) const;

    /// Runs the test chains (streams 1..N) and evaluates every control on the same chains.
    /// `kept` receives the first persist_trajectories test chains when non-null.
    VRFReport evaluate(const std::vector<FittedControl>& controls, std::vector<Trajectory>* kept = nullptr) const;

private:
    ExperimentConfig config_;
    TargetPtr target_;
    ScalarFunction functional_;
    SteinFamily family_;
};

/// Full protocol: train chain, fits, test chains, aggregation.
VRFReport run_experiment(const ExperimentConfig& config, std::vector<Trajectory>* kept = nullptr);

struct SweepRow {
    std::size_t bn = 0;
    double mean_vrf = 0.0;
    std::size_t infinite_count = 0;
    double objective_at_theta = 0.0;
};

/// Refits ESVM for each truncation and evaluates all fits on one shared set of test chains.
std::vector<SweepRow> bn_sweep(const ExperimentConfig& config, const std::vector<std::size_t>& bn_values,
                               VRFReport* report_out = nullptr);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// Writes traj_XXX.bin (+ .json) for each kept test chain under dir/trajectories.
void persist_trajectories(const std::vector<Trajectory>& chains, const std::filesystem::path& dir);

}  // namespace esvm
