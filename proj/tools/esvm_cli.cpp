// esvm: command-line driver for sampling, fitting and evaluating spectral-variance control variates.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "esvm/error.hpp"
#include "esvm/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Override the master seed");
    cmd->add_option("--out", o.out, "Output directory (overrides output_dir)");
    cmd->add_option("--threads", o.threads, "Worker threads for test chains (env ESVM_THREADS)");
}

esvm::ExperimentConfig resolve(const CommonOptions& o) {
    auto cfg = esvm::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.output_dir = *o.out;
    if (o.threads) {
        cfg.threads = *o.threads;
    } else if (const char* env = std::getenv("ESVM_THREADS")) {
        try {
            cfg.threads = std::stoul(env);
        } catch (const std::exception&) {
            throw esvm::ConfigError(std::string("ESVM_THREADS is not a number: ") + env);
        }
    }
    cfg.validate();
    return cfg;
}

nlohmann::json controls_to_json(const esvm::ExperimentConfig& cfg, const std::vector<esvm::FittedControl>& controls) {
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& c : controls) {
        esvm::MethodReport m;
        m.label = c.label;
        m.criterion = esvm::to_string(c.criterion);
        m.theta = esvm::to_fitted_theta(c);
        m.fit = esvm::to_fit_summary(c);
        methods.push_back(esvm::to_json(m));
    }
    return {{"schema_version", esvm::kReportSchemaVersion}, {"config", esvm::to_json(cfg)}, {"methods", methods}};
}

std::vector<esvm::FittedControl> controls_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw esvm::IoError("cannot open fit file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw esvm::ConfigError("malformed fit file " + path + ": " + e.what());
    }
    std::vector<esvm::FittedControl> out;
    for (const auto& m : j.at("methods")) out.push_back(esvm::control_from_report(esvm::method_report_from_json(m)));
    return out;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw esvm::IoError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

void finish_report(const esvm::VRFReport& report, const esvm::ExperimentConfig& cfg, const std::vector<esvm::Trajectory>& kept) {
    for (const auto& p : esvm::emit_report(report, cfg.output_dir)) std::cout << "wrote " << p.string() << '\n';
    if (!kept.empty()) esvm::persist_trajectories(kept, cfg.output_dir);
    for (const auto& m : report.methods)
        std::cout << m.label << ": mean VRF " << m.mean_vrf << " over " << m.vrf.size() - m.infinite_count
                  << " chains (" << m.infinite_count << " infinite)\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral-variance control variates for MCMC"};
    app.require_subcommand(1);

    CommonOptions common;

    auto* sample = app.add_subcommand("sample", "Sample one chain and persist it");
    add_common(sample, common);
    std::uint32_t stream = 0;
    bool csv = false;
    sample->add_option("--stream", stream, "Stream index (0 = training chain)");
    sample->add_flag("--csv", csv, "Also write a CSV export");

    auto* fitcmd = app.add_subcommand("fit", "Fit the configured methods on the training chain");
    add_common(fitcmd, common);

    auto* evalcmd = app.add_subcommand("evaluate", "Evaluate previously fitted controls on test chains");
    add_common(evalcmd, common);
    std::string fit_path;
    evalcmd->add_option("--fit", fit_path, "fit.json written by the fit subcommand")->required()->check(CLI::ExistingFile);

    auto* run = app.add_subcommand("run", "Full pipeline: train, fit, evaluate, report");
    add_common(run, common);

    auto* acf = app.add_subcommand("acf", "Autocorrelation of the functional on the training chain");
    add_common(acf, common);
    std::size_t max_lag = 100;
    acf->add_option("--max-lag", max_lag, "Largest lag");

    auto* sweep = app.add_subcommand("sweep-bn", "Mean ESVM VRF for several training truncation points");
    add_common(sweep, common);
    std::vector<std::size_t> bn_values;
    sweep->add_option("--bn", bn_values, "Truncation points")->required()->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const auto cfg = resolve(common);
        const esvm::Experiment exp(cfg);
        const std::filesystem::path out = cfg.output_dir;

        if (sample->parsed()) {
            const auto n = stream == 0 ? cfg.n_train : cfg.n_test;
            const auto chain = exp.sample(stream, n);
            std::filesystem::create_directories(out);
            const auto path = out / ("chain_" + std::to_string(stream) + ".bin");
            esvm::write_trajectory(chain.trajectory, path);
            if (csv) esvm::write_trajectory_csv(chain.trajectory, out / ("chain_" + std::to_string(stream) + ".csv"));
            std::cout << "wrote " << path.string() << " (" << chain.trajectory.size() << " states, acceptance "
                      << chain.stats.rate() << ")\n";
        } else if (fitcmd->parsed()) {
            const auto train = exp.training_data();
            const auto controls = exp.fit_all(train);
            write_json(controls_to_json(cfg, controls), out / "fit.json");
            std::cout << "wrote " << (out / "fit.json").string() << '\n';
        } else if (evalcmd->parsed()) {
            const auto controls = controls_from_file(fit_path);
            std::vector<esvm::Trajectory> kept;
            const auto report = exp.evaluate(controls, &kept);
            finish_report(report, cfg, kept);
        } else if (run->parsed()) {
            std::vector<esvm::Trajectory> kept;
            const auto report = esvm::run_experiment(cfg, &kept);
            finish_report(report, cfg, kept);
            if (cfg.acf_max_lag > 0) {
                const auto train = exp.training_data();
                esvm::write_acf_csv(esvm::acf_dump({train.f}, cfg.acf_max_lag), out / "acf.csv");
            }
        } else if (acf->parsed()) {
            const auto train = exp.training_data();
            std::filesystem::create_directories(out);
            esvm::write_acf_csv(esvm::acf_dump({train.f}, max_lag), out / "acf.csv");
            std::cout << "wrote " << (out / "acf.csv").string() << '\n';
        } else if (sweep->parsed()) {
            esvm::VRFReport report;
            const auto rows = esvm::bn_sweep(cfg, bn_values, &report);
            std::filesystem::create_directories(out);
            esvm::write_sweep_csv(rows, out / "bn_sweep.csv");
            std::cout << "wrote " << (out / "bn_sweep.csv").string() << '\n';
            for (const auto& r : rows) std::cout << "bn=" << r.bn << " mean VRF " << r.mean_vrf << '\n';
        }
    } catch (const esvm::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const esvm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const esvm::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
