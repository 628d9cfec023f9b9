#include <doctest.h>

#include <cmath>
#include <random>

#include "esvm/error.hpp"
#include "esvm/targets.hpp"
#include "esvm/variance.hpp"
#include "support.hpp"

using namespace esvm;

namespace {

// Dense A_n built straight from the kernel definition, independent of LagWindow.
Eigen::MatrixXd dense_operator(std::size_t n, std::size_t bn) {
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            const double u = std::abs(static_cast<double>(j - i)) / static_cast<double>(bn);
            if (u < 1.0) w(i, j) = u <= 0.5 ? 1.0 : 2.0 * (1.0 - u);
        }
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / double(n));
    return p * w * p / double(n);
}

double power_iteration_norm(const Eigen::MatrixXd& a) {
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(a.rows(), 1.0, 2.0);
    double lambda = 0.0;
    for (int it = 0; it < 5000; ++it) {
        Eigen::VectorXd av = a * v;
        const double next = av.norm() / v.norm();
        v = av.normalized();
        if (std::abs(next - lambda) <= 1e-8 * std::max(1.0, next)) return next;
        lambda = next;
    }
    return lambda;
}

}  // namespace

TEST_CASE("trapezoid kernel") {
    CHECK(trapezoid_kernel(0.0) == 1.0);
    CHECK(trapezoid_kernel(1.0) == 0.0);
    CHECK(trapezoid_kernel(-1.0) == 0.0);
    CHECK(trapezoid_kernel(0.75) == doctest::Approx(0.5));
    CHECK(trapezoid_kernel(-0.5) == 1.0);
    CHECK_THROWS_AS(trapezoid_kernel(1.01), ConfigError);
    CHECK(kernel_value(KernelKind::Flat, 0.6) == 0.0);
    CHECK(kernel_value(KernelKind::Flat, 0.5) == 1.0);
}

TEST_CASE("lag window weights") {
    LagWindow w(4);
    REQUIRE(w.weights().size() == 4);
    CHECK(w.weight(0) == 1.0);
    CHECK(w.weight(2) == 1.0);
    CHECK(w.weight(-3) == doctest::Approx(0.5));
    CHECK(w.weight(4) == 0.0);
    CHECK_THROWS_AS(LagWindow(0), ConfigError);
}

TEST_CASE("default truncation is the exact integer cube-root ceiling") {
    CHECK(default_truncation(1) == 1);
    CHECK(default_truncation(8) == 2);
    CHECK(default_truncation(9) == 3);
    CHECK(default_truncation(1000) == 10);
    CHECK(default_truncation(10000) == 22);
    CHECK(default_truncation(100000) == 47);
    CHECK(default_truncation(1000000) == 100);
}

TEST_CASE("sample autocovariance") {
    auto s = test::series({1, 2, 3});
    CHECK(sample_autocovariance(s, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(sample_autocovariance(s, 1) == doctest::Approx(0.0));
    CHECK(sample_autocovariance(s, 2) == doctest::Approx(-1.0 / 3.0));
    CHECK(sample_autocovariance(test::series(Eigen::VectorXd::Constant(10, 4.0)), 3) == 0.0);
    CHECK_THROWS_AS(sample_autocovariance(s, 3), ConfigError);

    std::mt19937_64 gen(5);
    auto iid = test::series(test::random_vector(gen, 1000000));
    CHECK(sample_autocovariance(iid, 0) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(sample_autocovariance(iid, 5)) < 0.01);
}

TEST_CASE("spectral variance") {
    CHECK(spectral_variance(test::series({5, 5, 5, 5}), LagWindow(2)).value == 0.0);
    CHECK(spectral_variance(test::series({1, 2, 3}), LagWindow(1)).value == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_WITH_AS(spectral_variance(test::series({1, 2, 3}), LagWindow(4)), "truncation exceeds sample size",
                         ConfigError);

    // AR(1), a = 0.5: b_n = 2 log n / log(1/a)
    const std::size_t n = 100000;
    auto ref = ar1_reference(0.5, n, {2019, 0});
    const auto bn = static_cast<std::size_t>(std::ceil(2.0 * std::log(double(n)) / std::log(2.0)));
    auto h = evaluate([](const StateVector& x) { return x[0]; }, ref.trajectory);
    auto sv = spectral_variance(h, LagWindow(bn));
    CHECK(sv.truncation == bn);
    CHECK(sv.n == n);
    CHECK(sv.value == doctest::Approx(4.0).epsilon(0.10));
}

TEST_CASE("spectral variance is shift invariant and scales quadratically") {
    std::mt19937_64 gen(9);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd z = test::random_vector(gen, 150);
        LagWindow w(1 + rep * 3);
        const double base = spectral_variance(z, w).value;
        Eigen::VectorXd shifted = (z.array() + 17.5).matrix();
        CHECK(spectral_variance(shifted, w).value == doctest::Approx(base).epsilon(1e-10));
        CHECK(spectral_variance(Eigen::VectorXd(3.0 * z), w).value == doctest::Approx(9.0 * base).epsilon(1e-12));
    }
}

TEST_CASE("empirical variance") {
    CHECK(empirical_variance(test::series({1, 2, 3})) == doctest::Approx(1.0));
    CHECK(empirical_variance(test::series({2, 2, 2})) == 0.0);
    CHECK_THROWS_AS(empirical_variance(test::series({1})), ConfigError);
    std::mt19937_64 gen(1);
    CHECK(empirical_variance(test::series(test::random_vector(gen, 1000000, 2.0))) == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("dense oracle for n = 2, b_n = 1") {
    auto a = weight_matrix_oracle(2, LagWindow(1));
    CHECK(a(0, 0) == doctest::Approx(0.25));
    CHECK(a(0, 1) == doctest::Approx(-0.25));
    CHECK(a(1, 1) == doctest::Approx(0.25));
    CHECK_THROWS_AS(weight_matrix_oracle(kDenseOracleLimit + 1, LagWindow(1)), ConfigError);
}

TEST_CASE("library oracle matches an independently built dense operator") {
    for (std::size_t n : {1u, 2u, 7u, 40u, 129u}) {
        for (std::size_t bn : {std::size_t{1}, (n + 1) / 2, n}) {
            const Eigen::MatrixXd diff = weight_matrix_oracle(n, LagWindow(bn)) - dense_operator(n, bn);
            CHECK(diff.cwiseAbs().maxCoeff() < 1e-14);
        }
    }
}

TEST_CASE("matrix-free quadratic form and operator agree with the oracle") {
    std::mt19937_64 gen(64);
    Eigen::VectorXd z = test::random_vector(gen, 64);
    LagWindow w(7);
    const auto a = dense_operator(64, 7);
    const double dense = z.dot(a * z);
    CHECK(test::rel_err(quadratic_form_apply(z, w), dense) < 1e-10);
    CHECK(test::rel_err(spectral_variance(z, w).value, dense) < 1e-10);
    CHECK((apply_spectral_operator(z, w) - a * z).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(quadratic_form_apply(Eigen::VectorXd::Constant(64, 2.0), w) == doctest::Approx(0.0));

    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(4);
    e0[0] = 1.0;
    CHECK(quadratic_form_apply(e0, LagWindow(1)) == doctest::Approx(dense_operator(4, 1)(0, 0)));
}

TEST_CASE("random instances: quadratic form equivalence and norm bound") {
    std::mt19937_64 gen(2019);
    std::uniform_int_distribution<std::size_t> n_dist(1, 256);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = n_dist(gen);
        const std::size_t bn = std::uniform_int_distribution<std::size_t>(1, n)(gen);
        Eigen::VectorXd z = test::random_vector(gen, static_cast<Eigen::Index>(n), 3.0);
        const auto a = dense_operator(n, bn);
        const double dense = z.dot(a * z);
        const double fast = spectral_variance(z, LagWindow(bn)).value;
        CHECK(std::abs(fast - dense) <= 1e-10 * std::max(std::abs(dense), 1e-12));
        if (rep < 50) CHECK(power_iteration_norm(a) <= 2.0 * double(bn) / double(n) + 1e-8);
    }
}

TEST_CASE("autocorrelation") {
    std::mt19937_64 gen(12);
    const std::size_t n = 200000;
    auto acf = autocorrelation(test::series(test::random_vector(gen, n)), 3);
    CHECK(acf[0] == 1.0);
    CHECK(std::abs(acf[1]) < 3.0 / std::sqrt(double(n)));
    CHECK_THROWS_WITH_AS(autocorrelation(test::series({1, 1, 1}), 1), "degenerate series", NumericError);

    auto ref = ar1_reference(0.5, 1000000, {4, 0});
    auto ar = autocorrelation(evaluate([](const StateVector& x) { return x[0]; }, ref.trajectory), 4);
    for (std::size_t s = 1; s <= 4; ++s) CHECK(std::abs(ar[s] - std::pow(0.5, double(s))) < 0.02);
}
