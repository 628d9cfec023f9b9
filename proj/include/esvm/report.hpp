#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace esvm {

inline constexpr int kReportSchemaVersion = 1;

/// Linear-interpolated (numpy "linear") quantiles of a sample.
struct Quartiles {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;

    friend bool operator==(const Quartiles&, const Quartiles&) = default;
};

Quartiles quartiles(std::vector<double> values);

struct BoxplotData {
    Quartiles raw;
    std::optional<Quartiles> centered;  // raw minus the exact expectation, when known

    friend bool operator==(const BoxplotData&, const BoxplotData&) = default;
};

/// Fitted control variate as serialized in reports: {family, d, r, params}.
struct FittedTheta {
    std::string family;
    std::size_t dim = 0;
    std::size_t centers = 0;
    std::vector<double> params;

    friend bool operator==(const FittedTheta&, const FittedTheta&) = default;
};

struct FitSummary {
    std::string method;  // LinearSolve | QuasiNewton
    std::size_t iterations = 0;
    bool converged = false;
    double objective_at_theta = 0;
    double objective_at_zero = 0;
    std::size_t bn_train = 0;
    std::string note;

    friend bool operator==(const FitSummary&, const FitSummary&) = default;
};

/// Per-method evaluation over the test chains. Vectors are indexed by test chain (stream 1..N).
struct MethodReport {
    std::string label;      // "ESVM", "EVM", or "ESVM(bn=...)" in sweeps
    std::string criterion;  // ESVM | EVM
    FittedTheta theta;
    FitSummary fit;
    std::vector<double> spectral_adjusted;
    std::vector<double> vrf;         // 0 where infinite
    std::vector<bool> vrf_infinite;
    std::vector<double> averages;    // ergodic averages of f - g
    double mean_vrf = 0;             // over finite entries
    std::size_t infinite_count = 0;
    BoxplotData boxplot;

    friend bool operator==(const MethodReport&, const MethodReport&) = default;
};

struct VRFReport {
    int schema_version = kReportSchemaVersion;
    nlohmann::json config;
    std::string target_label;
    std::string functional;
    std::optional<double> exact_value;
    std::size_t bn_test = 0;
    double train_acceptance = 0;
    std::vector<double> test_acceptance;
    std::vector<double> spectral_vanilla;
    std::vector<double> vanilla_averages;
    BoxplotData vanilla_boxplot;
    std::vector<MethodReport> methods;
    std::map<std::string, double> timings_ms;  // excluded from determinism comparisons
    std::string timestamp;                      // excluded from determinism comparisons

    const MethodReport* find(const std::string& label) const;

    friend bool operator==(const VRFReport&, const VRFReport&) = default;
};

nlohmann::json to_json(const MethodReport& method);
MethodReport method_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const VRFReport& report);
VRFReport report_from_json(const nlohmann::json& j);

/// report.json with timestamp and timings removed, for byte-level determinism checks.
nlohmann::json deterministic_view(const VRFReport& report);

/// Writes report.json, vrf.csv and boxplot.csv into dir (created if missing). Returns the paths written.
std::vector<std::filesystem::path> emit_report(const VRFReport& report, const std::filesystem::path& dir);

VRFReport read_report(const std::filesystem::path& report_json);

/// Writes "lag,acf" rows with 17 significant digits.
void write_acf_csv(const std::vector<double>& acf, const std::filesystem::path& path);

}  // namespace esvm
