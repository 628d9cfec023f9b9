#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "esvm/config.hpp"
#include "esvm/error.hpp"
#include "esvm/report.hpp"
#include "support.hpp"

using namespace esvm;
using nlohmann::json;

namespace {

json minimal_config() {
    return json::parse(R"({
        "target": {"kind": "gaussian", "d": 2},
        "sampler": {"kind": "MALA", "gamma": 0.5},
        "n_burn": 10, "n_train": 200, "n_test": 100, "n_test_chains": 3, "bn": 5, "seed": 1
    })");
}

}  // namespace

TEST_CASE("config parsing and defaults") {
    auto c = parse_config(minimal_config());
    CHECK(c.sampler == SamplerKind::MALA);
    CHECK(c.gamma == 0.5);
    CHECK(c.effective_bn_test() == 5);
    CHECK(c.family.kind == SteinFamily::Kind::SecondOrder);
    CHECK(c.methods.size() == 2);
    CHECK(c.kernel == KernelKind::Trapezoid);

    auto j = minimal_config();
    j["methods"] = {"none"};
    CHECK(parse_config(j).methods.empty());

    // to_json is a fixed point of parse_config
    auto again = parse_config(to_json(c));
    CHECK(to_json(again) == to_json(c));
}

TEST_CASE("config errors") {
    auto bad = [](auto mutate) {
        auto j = minimal_config();
        mutate(j);
        return j;
    };
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j.erase("sampler"); })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["sampler"]["kind"] = "HMC"; })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["sampler"]["gamma"] = -1.0; })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["bn"] = 0; })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["bn"] = 201; })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["n_train"] = "many"; })), ConfigError);
    CHECK_THROWS_AS(parse_config(bad([](json& j) { j["methods"] = {"ZV"}; })), ConfigError);
    CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
    CHECK_THROWS_AS(make_target(json{{"kind", "unknown"}}), ConfigError);
}

TEST_CASE("shipped experiment configs parse and build") {
    for (const auto& entry : std::filesystem::directory_iterator(ESVM_SOURCE_DIR "/configs")) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().string());
        auto c = load_config(entry.path());
        auto target = make_target(c.target);
        auto f = make_functional(c.functional, target);
        auto family = make_family(c.family, target->dim());
        CHECK(family.dim() == (family.kind() == SteinFamily::Kind::Rbf ? 1u : target->dim()));
        CHECK(std::isfinite(f(StateVector::Zero(static_cast<Eigen::Index>(target->dim())))));
    }
}

TEST_CASE("functionals") {
    auto target = make_target(json{{"kind", "gaussian"}, {"d", 3}});
    StateVector x(3);
    x << 2.0, -1.0, 0.5;
    CHECK(make_functional({FunctionalSpec::Kind::Coordinate, 1}, target)(x) == -1.0);
    CHECK(make_functional({FunctionalSpec::Kind::SecondMoment, 0}, target)(x) == 4.0);
    CHECK(make_functional({FunctionalSpec::Kind::Cube, 0}, target)(x) == 8.0);
    CHECK_THROWS_AS(make_functional({FunctionalSpec::Kind::Coordinate, 3}, target), ConfigError);
    CHECK_THROWS_AS(make_functional({FunctionalSpec::Kind::TestLikelihood, 0}, target), ConfigError);
    CHECK(FunctionalSpec{FunctionalSpec::Kind::SecondMoment, 1}.name() == "second_moment[1]");
}

TEST_CASE("quartiles follow linear interpolation") {
    auto q = quartiles({4, 1, 3, 2});
    CHECK(q.min == 1.0);
    CHECK(q.q1 == doctest::Approx(1.75));
    CHECK(q.median == doctest::Approx(2.5));
    CHECK(q.q3 == doctest::Approx(3.25));
    CHECK(q.max == 4.0);
    auto single = quartiles({7});
    CHECK(single.q1 == 7.0);
    CHECK(quartiles({}) == Quartiles{});
}

TEST_CASE("report JSON round trip and CSV emission") {
    VRFReport r;
    r.config = to_json(parse_config(minimal_config()));
    r.target_label = "gaussian(d=2)";
    r.functional = "mean[0]";
    r.exact_value = 0.0;
    r.bn_test = 5;
    r.train_acceptance = 0.61;
    r.test_acceptance = {0.6, 0.62};
    r.spectral_vanilla = {1.0 / 3.0, 2.5};
    r.vanilla_averages = {0.1, -0.2};
    r.vanilla_boxplot = {quartiles({0.1, -0.2}), quartiles({0.1, -0.2})};
    MethodReport m;
    m.label = "ESVM";
    m.criterion = "ESVM";
    m.theta = {"SecondOrder", 2, 0, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}};
    m.fit = {"LinearSolve", 0, true, 0.01, 1.2, 5, ""};
    m.spectral_adjusted = {0.01, 0.0};
    m.vrf = {100.0 / 3.0, 0.0};
    m.vrf_infinite = {false, true};
    m.averages = {0.01, 0.02};
    m.mean_vrf = 100.0 / 3.0;
    m.infinite_count = 1;
    m.boxplot = {quartiles({0.01, 0.02}), std::nullopt};
    r.methods.push_back(m);
    r.timings_ms["fit"] = 1.5;
    r.timestamp = "2026-01-01T00:00:00Z";

    CHECK(report_from_json(to_json(r)) == r);
    CHECK(method_report_from_json(to_json(m)) == m);
    REQUIRE(r.find("ESVM") != nullptr);
    CHECK(r.find("EVM") == nullptr);

    const auto dir = test::scratch_dir("report");
    auto paths = emit_report(r, dir);
    CHECK(paths.size() == 3);
    CHECK(read_report(dir / "report.json") == r);

    std::ifstream vrf(dir / "vrf.csv");
    std::string line;
    std::getline(vrf, line);
    CHECK(line == "method,chain,vanilla_spectral,adjusted_spectral,vrf,infinite,vanilla_average,adjusted_average");
    std::getline(vrf, line);
    CHECK(line.rfind("ESVM,1,0.33333333333333331,", 0) == 0);
    std::size_t rows = 1;
    while (std::getline(vrf, line)) ++rows;
    CHECK(rows == 2);

    auto det = deterministic_view(r);
    CHECK_FALSE(det.contains("timestamp"));
    CHECK_FALSE(det.contains("timings_ms"));
    auto other = r;
    other.timestamp = "later";
    other.timings_ms["fit"] = 99.0;
    CHECK(deterministic_view(other) == det);
}
