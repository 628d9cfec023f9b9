#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "esvm/chain.hpp"

namespace esvm::test {

inline Eigen::VectorXd random_vector(std::mt19937_64& gen, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(gen);
    return v;
}

inline StateMatrix random_states(std::mt19937_64& gen, Eigen::Index n, Eigen::Index d, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    StateMatrix m(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = nd(gen);
    return m;
}

inline FunctionalSeries series(std::initializer_list<double> xs) {
    FunctionalSeries s;
    s.values.resize(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) s.values[i++] = x;
    return s;
}

inline FunctionalSeries series(Eigen::VectorXd v) { return FunctionalSeries{std::move(v)}; }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

/// Relative error of two gradients measured against the larger norm.
inline double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double scale = std::max({a.norm(), b.norm(), 1e-300});
    return (a - b).norm() / scale;
}

/// Central differences of a scalar function.
template <class F>
Eigen::VectorXd central_diff(F&& f, const Eigen::VectorXd& x, double rel_step = 1e-6) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = rel_step * (1.0 + std::abs(x[i]));
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("esvm_unit_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace esvm::test
