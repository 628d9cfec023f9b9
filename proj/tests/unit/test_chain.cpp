#include <doctest.h>

#include <cmath>
#include <fstream>

#include "esvm/chain.hpp"
#include "esvm/error.hpp"
#include "esvm/targets.hpp"
#include "support.hpp"

using namespace esvm;

namespace {

Trajectory make_traj(std::initializer_list<std::initializer_list<double>> rows) {
    StateMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return Trajectory(m, {});
}

}  // namespace

TEST_CASE("ergodic average") {
    CHECK(ergodic_average(test::series({1, 2, 3})) == doctest::Approx(2.0));
    CHECK(ergodic_average(test::series(Eigen::VectorXd::Constant(17, 3.25))) == doctest::Approx(3.25));
    CHECK_THROWS_WITH_AS(ergodic_average(FunctionalSeries{}), "empty series", ConfigError);
}

TEST_CASE("ergodic average of an AR(1) chain sits within three standard errors of zero") {
    const std::size_t n = 100000;
    auto ref = ar1_reference(0.5, n, {7, 0});
    const auto h = evaluate([](const StateVector& x) { return x[0]; }, ref.trajectory);
    const double se = std::sqrt(ref.asymptotic_variance / static_cast<double>(n));
    CHECK(std::abs(ergodic_average(h)) < 3.0 * se);
}

TEST_CASE("split_burn_in") {
    auto t = make_traj({{0}, {1}, {2}, {3}, {4}});
    auto kept = split_burn_in(t, 2);
    REQUIRE(kept.size() == 3);
    CHECK(kept.state(0)[0] == 2.0);
    CHECK(kept.state(2)[0] == 4.0);
    CHECK(kept.meta().burn_in_removed);
    CHECK(kept.meta().burn_in == 2);
    CHECK(split_burn_in(t, 0).states() == t.states());
    CHECK_THROWS_AS(split_burn_in(t, 5), ConfigError);
}

TEST_CASE("evaluate a functional along a trajectory") {
    auto t = make_traj({{1, 2}, {3, 4}});
    auto h = evaluate([](const StateVector& x) { return x[0]; }, t);
    CHECK(h.values[0] == 1.0);
    CHECK(h.values[1] == 3.0);
    auto sq = evaluate([](const StateVector& x) { return x[0] * x[0]; }, make_traj({{2, 0}}));
    CHECK(sq.values[0] == 4.0);

    auto bad = [](const StateVector& x) { return x[0] > 2 ? std::nan("") : x[0]; };
    CHECK_THROWS_WITH_AS(evaluate(bad, t), doctest::Contains("index 1"), NumericError);
}

TEST_CASE("trajectory rejects non-finite states and empty input") {
    StateMatrix m(2, 1);
    m << 1.0, std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Trajectory(m, {}), NumericError);
    CHECK_THROWS_AS(Trajectory(StateMatrix(0, 1), {}), ConfigError);
}

TEST_CASE("trajectory persistence round-trips bit-exactly") {
    std::mt19937_64 gen(3);
    TrajectoryMeta meta{"MALA", 0.25, {11, 4}, true, 100};
    Trajectory t(test::random_states(gen, 257, 3), meta);
    const auto dir = test::scratch_dir("traj");
    write_trajectory(t, dir / "t.bin");
    CHECK(std::filesystem::exists(dir / "t.bin.json"));
    CHECK(std::filesystem::file_size(dir / "t.bin") == 16 + 257 * 3 * 8);
    auto back = read_trajectory(dir / "t.bin");
    CHECK(back == t);

    std::ofstream(dir / "junk.bin") << "not a trajectory at all";
    CHECK_THROWS_AS(read_trajectory(dir / "junk.bin"), IoError);
    CHECK_THROWS_AS(read_trajectory(dir / "missing.bin"), IoError);
}
