#include "esvm/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "esvm/error.hpp"

namespace esvm {

namespace {

// Rethrows with the pipeline stage prefixed, keeping the error category.
template <class F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
    const auto tag = [stage](const std::exception& e) { return std::string("[") + stage + "] " + e.what(); };
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(tag(e));
    } catch (const NumericError& e) {
        throw NumericError(tag(e));
    } catch (const IoError& e) {
        throw IoError(tag(e));
    } catch (const std::exception& e) {
        throw Error(tag(e));
    }
}

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

struct ChainEvaluation {
    double acceptance = 0;
    double spectral_vanilla = 0;
    double average_vanilla = 0;
    std::vector<double> spectral_adjusted;
    std::vector<double> average_adjusted;
    std::vector<VrfValue> vrfs;
};

}  // namespace

FittedTheta to_fitted_theta(const FittedControl& c) {
    return {to_string(c.family.kind()), c.family.dim(), c.family.centers(),
            std::vector<double>(c.fit.theta.data(), c.fit.theta.data() + c.fit.theta.size())};
}

FitSummary to_fit_summary(const FittedControl& c) {
    return {to_string(c.fit.method), c.fit.iterations,         c.fit.converged, c.fit.objective_at_theta,
            c.fit.objective_at_zero, c.bn_train, c.fit.note};
}

FittedControl control_from_report(const MethodReport& m) {
    FittedControl c;
    c.label = m.label;
    c.criterion = parse_criterion(m.criterion);
    switch (parse_family_kind(m.theta.family)) {
        case SteinFamily::Kind::FirstOrder: c.family = SteinFamily::first_order(m.theta.dim); break;
        case SteinFamily::Kind::SecondOrder: c.family = SteinFamily::second_order(m.theta.dim); break;
        case SteinFamily::Kind::Rbf: c.family = SteinFamily::rbf(m.theta.centers); break;
    }
    if (m.theta.params.size() != c.family.param_count()) throw ConfigError("fitted parameter count does not match family");
    c.fit.theta = Eigen::Map<const Eigen::VectorXd>(m.theta.params.data(), static_cast<Eigen::Index>(m.theta.params.size()));
    c.fit.method = m.fit.method == "LinearSolve" ? FitMethod::LinearSolve : FitMethod::QuasiNewton;
    c.fit.iterations = m.fit.iterations;
    c.fit.converged = m.fit.converged;
    c.fit.objective_at_theta = m.fit.objective_at_theta;
    c.fit.objective_at_zero = m.fit.objective_at_zero;
    c.fit.note = m.fit.note;
    c.bn_train = m.fit.bn_train;
    return c;
}

VrfValue vrf(const FunctionalSeries& f, const FunctionalSeries& h, const LagWindow& window) {
    if (f.size() != h.size()) throw ConfigError("vrf: series lengths differ");
    const double num = spectral_variance(f, window).clamped();
    const double den = spectral_variance(h, window).clamped();
    if (den < kVrfDenominatorFloor) return {0.0, true};
    return {num / den, false};
}

std::vector<double> acf_dump(const FunctionalSeries& series, std::size_t max_lag) {
    return autocorrelation(series, max_lag);
}

// --- Experiment ------------------------------------------------------------------

Experiment::Experiment(ExperimentConfig config)
    : config_(std::move(config)), family_(SteinFamily::first_order(1)) {
    staged("config", [&] {
        config_.validate();
        target_ = make_target(config_.target);
        functional_ = make_functional(config_.functional, target_);
        family_ = make_family(config_.family, target_->dim());
        if (config_.x0 && config_.x0->size() != target_->dim()) throw ConfigError("x0 dimension does not match target");
        return 0;
    });
}

std::optional<double> Experiment::exact_value() const {
    const auto& m = target_->exact_moments();
    const auto it = m.find(config_.functional.name());
    if (it == m.end()) return std::nullopt;
    return it->second;
}

ChainResult Experiment::sample(std::uint32_t stream, std::size_t n) const {
    SamplerConfig sc{config_.sampler, config_.gamma, config_.n_burn + n, {config_.seed, stream}};
    std::optional<StateVector> x0;
    if (config_.x0) x0 = Eigen::Map<const Eigen::VectorXd>(config_.x0->data(), static_cast<Eigen::Index>(config_.x0->size()));
    ChainResult r = sample_chain(sc, *target_, x0);
    if (config_.n_burn > 0) r.trajectory = split_burn_in(r.trajectory, config_.n_burn);
    return r;
}

TrainingData Experiment::training_data() const {
    return staged("train", [&] {
        auto r = sample(0, config_.n_train);
        FunctionalSeries f = esvm::evaluate(functional_, r.trajectory);
        StateMatrix grads = gradient_matrix(*target_, r.trajectory);
        return TrainingData{std::move(r.trajectory), r.stats, std::move(f.values), std::move(grads)};
    });
}

DesignSet Experiment::design(const TrainingData& train, std::size_t bn) const {
    return DesignSet::assemble(family_, train.chain, train.grads, train.f, LagWindow(bn, config_.kernel));
}

FittedControl Experiment::fit_control(const TrainingData& train, Criterion criterion, std::size_t bn,
                                      std::string label) const {
    return staged("fit", [&] {
        const DesignSet d = design(train, bn);
        FittedControl c;
        c.label = std::move(label);
        c.criterion = criterion;
        c.family = family_;
        c.fit = fit(d, criterion);
        c.bn_train = criterion == Criterion::ESVM ? bn : 0;
        return c;
    });
}

std::vector<FittedControl> Experiment::fit_all(const TrainingData& train) const {
    std::vector<FittedControl> out;
    for (auto m : config_.methods) out.push_back(fit_control(train, m, config_.bn, to_string(m)));
    return out;
}

VRFReport Experiment::evaluate(const std::vector<FittedControl>& controls, std::vector<Trajectory>* kept) const {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n_chains = config_.n_test_chains;
    const LagWindow test_window(config_.effective_bn_test(), config_.kernel);
    std::vector<ChainEvaluation> evals(n_chains);
    std::vector<std::optional<Trajectory>> keep(kept ? config_.persist_trajectories : 0);

    staged("test", [&] {
        parallel_for(n_chains, config_.threads, [&](std::size_t i) {
            auto chain = sample(static_cast<std::uint32_t>(i + 1), config_.n_test);
            const FunctionalSeries f = esvm::evaluate(functional_, chain.trajectory);
            const StateMatrix grads = gradient_matrix(*target_, chain.trajectory);
            ChainEvaluation ev;
            ev.acceptance = chain.stats.rate();
            ev.spectral_vanilla = spectral_variance(f, test_window).clamped();
            ev.average_vanilla = ergodic_average(f);
            for (const auto& c : controls) {
                FunctionalSeries h{f.values - stein_values(c.family, c.fit.theta, chain.trajectory.states(), grads)};
                if (!h.values.allFinite()) throw NumericError("adjusted functional is not finite");
                ev.spectral_adjusted.push_back(spectral_variance(h, test_window).clamped());
                ev.average_adjusted.push_back(ergodic_average(h));
                ev.vrfs.push_back(vrf(f, h, test_window));
            }
            if (i < keep.size()) keep[i] = std::move(chain.trajectory);
            evals[i] = std::move(ev);
        });
        return 0;
    });

    VRFReport report;
    report.config = to_json(config_);
    report.target_label = target_->label();
    report.functional = config_.functional.name();
    report.exact_value = exact_value();
    report.bn_test = test_window.truncation();

    auto box = [&](const std::vector<double>& avgs) {
        BoxplotData b{quartiles(avgs), std::nullopt};
        if (report.exact_value) {
            std::vector<double> centered = avgs;
            for (auto& v : centered) v -= *report.exact_value;
            b.centered = quartiles(std::move(centered));
        }
        return b;
    };

    for (const auto& ev : evals) {
        report.test_acceptance.push_back(ev.acceptance);
        report.spectral_vanilla.push_back(ev.spectral_vanilla);
        report.vanilla_averages.push_back(ev.average_vanilla);
    }
    report.vanilla_boxplot = box(report.vanilla_averages);

    for (std::size_t m = 0; m < controls.size(); ++m) {
        MethodReport mr;
        mr.label = controls[m].label;
        mr.criterion = to_string(controls[m].criterion);
        mr.theta = to_fitted_theta(controls[m]);
        mr.fit = to_fit_summary(controls[m]);
        double sum = 0.0;
        std::size_t finite = 0;
        for (const auto& ev : evals) {
            const auto& v = ev.vrfs[m];
            mr.spectral_adjusted.push_back(ev.spectral_adjusted[m]);
            mr.averages.push_back(ev.average_adjusted[m]);
            mr.vrf.push_back(v.value);
            mr.vrf_infinite.push_back(v.infinite);
            if (v.infinite) {
                ++mr.infinite_count;
            } else {
                sum += v.value;
                ++finite;
            }
        }
        mr.mean_vrf = finite ? sum / static_cast<double>(finite) : 0.0;
        mr.boxplot = box(mr.averages);
        report.methods.push_back(std::move(mr));
    }

    if (kept) {
        kept->clear();
        for (auto& t : keep) kept->push_back(std::move(*t));
    }
    report.timings_ms["test"] = elapsed_ms(start);
    report.timestamp = utc_timestamp();
    return report;
}

VRFReport run_experiment(const ExperimentConfig& config, std::vector<Trajectory>* kept) {
    const Experiment exp(config);
    auto t0 = std::chrono::steady_clock::now();
    const TrainingData train = exp.training_data();
    const double train_ms = elapsed_ms(t0);
    t0 = std::chrono::steady_clock::now();
    const auto controls = exp.fit_all(train);
    const double fit_ms = elapsed_ms(t0);
    VRFReport report = exp.evaluate(controls, kept);
    report.train_acceptance = train.stats.rate();
    report.timings_ms["train"] = train_ms;
    report.timings_ms["fit"] = fit_ms;
    return report;
}

std::vector<SweepRow> bn_sweep(const ExperimentConfig& config, const std::vector<std::size_t>& bn_values,
                               VRFReport* report_out) {
    if (bn_values.empty()) throw ConfigError("bn sweep needs at least one value");
    for (auto bn : bn_values)
        if (bn < 1 || bn > config.n_train) throw ConfigError("sweep value bn=" + std::to_string(bn) + " outside [1, n_train]");
    const Experiment exp(config);
    const TrainingData train = exp.training_data();
    std::vector<FittedControl> controls;
    for (auto bn : bn_values) controls.push_back(exp.fit_control(train, Criterion::ESVM, bn, "ESVM(bn=" + std::to_string(bn) + ")"));
    VRFReport report = exp.evaluate(controls);
    report.train_acceptance = train.stats.rate();
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < bn_values.size(); ++i) {
        const auto& m = report.methods[i];
        rows.push_back({bn_values[i], m.mean_vrf, m.infinite_count, m.fit.objective_at_theta});
    }
    if (report_out) *report_out = std::move(report);
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << std::setprecision(17) << "bn,mean_vrf,infinite_count,train_objective\n";
    for (const auto& r : rows) out << r.bn << ',' << r.mean_vrf << ',' << r.infinite_count << ',' << r.objective_at_theta << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

void persist_trajectories(const std::vector<Trajectory>& chains, const std::filesystem::path& dir) {
    const auto sub = dir / "trajectories";
    std::error_code ec;
    std::filesystem::create_directories(sub, ec);
    if (ec) throw IoError("cannot create directory " + sub.string() + ": " + ec.message());
    for (std::size_t i = 0; i < chains.size(); ++i) {
        std::ostringstream name;
        name << "traj_" << std::setw(3) << std::setfill('0') << i + 1 << ".bin";
        write_trajectory(chains[i], sub / name.str());
    }
}

}  // namespace esvm
