#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "esvm/config.hpp"
#include "esvm/error.hpp"
#include "esvm/harness.hpp"
#include "support.hpp"

using namespace esvm;
using nlohmann::json;

namespace {

ExperimentConfig small_gmm(std::size_t chains = 6) {
    return parse_config(json::parse(R"({
        "name": "small_gmm",
        "target": {"kind": "gmm", "rho": 0.5, "mu": [0.5, 0.5], "sigma": [[1, 0], [0, 1]]},
        "functional": {"kind": "second_moment", "index": 0},
        "sampler": {"kind": "ULA", "gamma": 0.1},
        "n_burn": 1000, "n_train": 5000, "n_test": 5000, "n_test_chains": )" +
                                    std::to_string(chains) + R"(, "bn": 50, "seed": 2019
    })"));
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("vrf edge cases") {
    auto f = test::series({1, 3, 2, 5, 4, 4, 1});
    auto v = vrf(f, f, LagWindow(2));
    CHECK(v.value == doctest::Approx(1.0));
    CHECK_FALSE(v.infinite);
    auto flat = vrf(f, test::series({2, 2, 2, 2, 2, 2, 2}), LagWindow(2));
    CHECK(flat.infinite);
    CHECK_THROWS_AS(vrf(f, test::series({1, 2}), LagWindow(1)), ConfigError);
}

TEST_CASE("experiment protocol") {
    auto config = small_gmm();
    auto report = run_experiment(config);
    CHECK(report.bn_test == default_truncation(5000));
    CHECK(report.spectral_vanilla.size() == 6);
    CHECK(report.exact_value.has_value());
    CHECK(*report.exact_value == doctest::Approx(1.25));
    REQUIRE(report.methods.size() == 2);
    for (const auto& m : report.methods) {
        CHECK(m.vrf.size() == 6);
        CHECK(m.fit.objective_at_theta <= m.fit.objective_at_zero);
        CHECK(m.fit.bn_train == (m.criterion == "ESVM" ? 50u : 0u));
        CHECK(m.theta.params.size() == 6);
        CHECK(m.mean_vrf > 10.0);
        REQUIRE(m.boxplot.centered.has_value());
        CHECK(m.boxplot.centered->median == doctest::Approx(m.boxplot.raw.median - 1.25));
    }
    CHECK(report.find("ESVM")->fit.objective_at_zero > 0.0);
}

TEST_CASE("determinism across runs and thread counts") {
    auto config = small_gmm(5);
    auto a = run_experiment(config);
    config.threads = 3;
    auto b = run_experiment(config);
    CHECK(deterministic_view(a) == deterministic_view(b));

    const auto dir = test::scratch_dir("determinism");
    emit_report(a, dir / "a");
    emit_report(b, dir / "b");
    CHECK(slurp(dir / "a" / "vrf.csv") == slurp(dir / "b" / "vrf.csv"));
    CHECK(slurp(dir / "a" / "boxplot.csv") == slurp(dir / "b" / "boxplot.csv"));

    config.seed = 2020;
    CHECK_FALSE(deterministic_view(run_experiment(config)) == deterministic_view(a));
}

TEST_CASE("method list without fits reports only the vanilla estimator") {
    auto config = small_gmm(3);
    config.methods.clear();
    auto report = run_experiment(config);
    CHECK(report.methods.empty());
    CHECK(report.vanilla_averages.size() == 3);
    const auto dir = test::scratch_dir("vanilla_only");
    emit_report(report, dir);
    std::ifstream vrf(dir / "vrf.csv");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(vrf, line)) ++lines;
    CHECK(lines == 1);
}

TEST_CASE("controls rebuilt from a report reproduce the evaluation") {
    auto config = small_gmm(4);
    Experiment exp(config);
    auto train = exp.training_data();
    auto controls = exp.fit_all(train);
    std::vector<Trajectory> kept;
    auto report = exp.evaluate(controls, &kept);
    CHECK(kept.empty());

    std::vector<FittedControl> rebuilt;
    for (const auto& m : report.methods) rebuilt.push_back(control_from_report(method_report_from_json(to_json(m))));
    auto again = exp.evaluate(rebuilt);
    REQUIRE(again.methods.size() == report.methods.size());
    for (std::size_t i = 0; i < report.methods.size(); ++i) CHECK(again.methods[i].vrf == report.methods[i].vrf);
}

TEST_CASE("persisted trajectories match the evaluated chains") {
    auto config = small_gmm(3);
    config.persist_trajectories = 2;
    std::vector<Trajectory> kept;
    auto report = run_experiment(config, &kept);
    REQUIRE(kept.size() == 2);
    const auto dir = test::scratch_dir("persist");
    persist_trajectories(kept, dir);
    auto back = read_trajectory(dir / "trajectories" / "traj_001.bin");
    CHECK(back == kept[0]);
    CHECK(back.meta().seed.stream == 1);
    CHECK(back.size() == 5000);
    auto f = evaluate([](const StateVector& x) { return x[0] * x[0]; }, back);
    CHECK(ergodic_average(f) == doctest::Approx(report.vanilla_averages[0]).epsilon(1e-12));
}

TEST_CASE("truncation sweep") {
    auto config = parse_config(json::parse(R"({
        "target": {"kind": "gmm", "rho": 0.5, "mu": [0.5, 0.5], "sigma": [[1, 0], [0, 1]]},
        "functional": {"kind": "coordinate", "index": 0},
        "sampler": {"kind": "ULA", "gamma": 0.1},
        "n_burn": 1000, "n_train": 10000, "n_test": 10000, "n_test_chains": 10, "bn": 50, "seed": 2019
    })"));
    VRFReport report;
    auto rows = bn_sweep(config, {1, 10, 100, 1000}, &report);
    REQUIRE(rows.size() == 4);
    CHECK(report.methods.size() == 4);
    CHECK(report.methods[1].label == "ESVM(bn=10)");
    double best = 0.0;
    for (const auto& r : rows) best = std::max(best, r.mean_vrf);
    CHECK(rows[1].mean_vrf >= 0.5 * best);

    const auto dir = test::scratch_dir("sweep");
    write_sweep_csv(rows, dir / "bn_sweep.csv");
    std::ifstream in(dir / "bn_sweep.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("bn,", 0) == 0);
}

TEST_CASE("isolated-modes experiment with the RBF family") {
    auto config = load_config(ESVM_SOURCE_DIR "/configs/gmm_isolated_rbf.json");
    config.n_train = 5000;
    config.n_test = 5000;
    config.n_test_chains = 4;
    auto report = run_experiment(config);
    REQUIRE(report.methods.size() == 2);
    for (const auto& m : report.methods) {
        CHECK(m.fit.method == "QuasiNewton");
        CHECK(m.fit.objective_at_theta <= m.fit.objective_at_zero);
        CHECK(m.theta.params.size() == 20);
    }
}

TEST_CASE("stage errors keep their type") {
    auto config = small_gmm();
    config.target = json{{"kind", "gmm"}, {"rho", 0.5}, {"mu", {0.5, 0.5}}, {"sigma", {{1, 2}, {2, 1}}}};
    CHECK_THROWS_WITH_AS(run_experiment(config), doctest::Contains("[config]"), ConfigError);
}
