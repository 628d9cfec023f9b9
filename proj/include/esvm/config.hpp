#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "esvm/control_variates.hpp"
#include "esvm/optimizer.hpp"
#include "esvm/samplers.hpp"
#include "esvm/targets.hpp"
#include "esvm/variance.hpp"

namespace esvm {

/// Quantity whose expectation is estimated.
struct FunctionalSpec {
    enum class Kind { Coordinate, SecondMoment, Cube, TestLikelihood };
    Kind kind = Kind::Coordinate;
    std::size_t index = 0;

    /// Key into TargetModel::exact_moments(): "mean[i]", "second_moment[i]", "cube[i]", "test_likelihood".
    std::string name() const;
};

struct FamilySpec {
    SteinFamily::Kind kind = SteinFamily::Kind::SecondOrder;
    std::size_t centers = 10;  // RBF only
};

/// One experiment in the train / fit / test-chains protocol. Parsed from a JSON document.
struct ExperimentConfig {
    std::string name = "experiment";
    nlohmann::json target;  // {"kind": ..., parameters}
    FunctionalSpec functional;
    SamplerKind sampler = SamplerKind::ULA;
    double gamma = 0.1;
    std::optional<std::vector<double>> x0;
    std::size_t n_burn = 0;
    std::size_t n_train = 1000;
    std::size_t n_test = 1000;
    std::size_t n_test_chains = 100;
    std::size_t bn = 50;
    std::optional<std::size_t> bn_test;  // default ceil(n_test^{1/3})
    KernelKind kernel = KernelKind::Trapezoid;
    FamilySpec family;
    std::vector<Criterion> methods{Criterion::ESVM, Criterion::EVM};
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::size_t threads = 1;
    std::size_t acf_max_lag = 0;        // > 0 writes acf.csv
    std::size_t persist_trajectories = 0;  // number of test chains written to disk

    std::size_t effective_bn_test() const { return bn_test.value_or(default_truncation(n_test)); }

    /// Throws ConfigError when any count or relation is invalid.
    void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Constructs the target described by a config "target" block.
TargetPtr make_target(const nlohmann::json& spec);

/// Evaluates the functional; TestLikelihood requires a regression target.
ScalarFunction make_functional(const FunctionalSpec& spec, const TargetPtr& target);

SteinFamily make_family(const FamilySpec& spec, std::size_t dim);

}  // namespace esvm
