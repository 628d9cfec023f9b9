#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "esvm/config.hpp"
#include "esvm/control_variates.hpp"
#include "esvm/error.hpp"
#include "esvm/harness.hpp"
#include "esvm/optimizer.hpp"
#include "esvm/report.hpp"
#include "esvm/samplers.hpp"
#include "esvm/targets.hpp"
#include "esvm/variance.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text; the Python wrapper handles dict <-> str.
json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw esvm::ConfigError(std::string("malformed JSON: ") + e.what());
    }
}

esvm::LagWindow window(std::size_t bn, const std::string& kernel) {
    return esvm::LagWindow(bn, esvm::parse_kernel_kind(kernel));
}

esvm::SteinFamily family(const std::string& kind, std::size_t dim, std::size_t centers) {
    switch (esvm::parse_family_kind(kind)) {
        case esvm::SteinFamily::Kind::FirstOrder: return esvm::SteinFamily::first_order(dim);
        case esvm::SteinFamily::Kind::SecondOrder: return esvm::SteinFamily::second_order(dim);
        case esvm::SteinFamily::Kind::Rbf: return esvm::SteinFamily::rbf(centers);
    }
    throw esvm::ConfigError("unknown family");
}

py::dict fit_to_dict(const esvm::FitResult& r) {
    py::dict d;
    d["theta"] = r.theta;
    d["objective_at_theta"] = r.objective_at_theta;
    d["objective_at_zero"] = r.objective_at_zero;
    d["method"] = esvm::to_string(r.method);
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["note"] = r.note;
    return d;
}

}  // namespace

PYBIND11_MODULE(_esvm, m) {
    m.doc() = "Spectral variance minimisation of Stein control variates";

    auto base = py::register_exception<esvm::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<esvm::ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<esvm::NumericError>(m, "NumericError", base.ptr());
    py::register_exception<esvm::IoError>(m, "IoError", base.ptr());

    // variance estimators
    m.def("trapezoid_kernel", &esvm::trapezoid_kernel, py::arg("u"));
    m.def("default_truncation", &esvm::default_truncation, py::arg("n"));
    m.def(
        "spectral_variance",
        [](const Eigen::VectorXd& values, std::size_t bn, const std::string& kernel) {
            return esvm::spectral_variance(values, window(bn, kernel)).value;
        },
        py::arg("values"), py::arg("bn"), py::arg("kernel") = "trapezoid");
    m.def(
        "sample_autocovariance",
        [](Eigen::VectorXd values, std::size_t lag) {
            return esvm::sample_autocovariance({std::move(values)}, lag);
        },
        py::arg("values"), py::arg("lag"));
    m.def(
        "empirical_variance", [](const Eigen::VectorXd& values) { return esvm::empirical_variance(values); },
        py::arg("values"));
    m.def(
        "autocorrelation",
        [](Eigen::VectorXd values, std::size_t max_lag) { return esvm::autocorrelation({std::move(values)}, max_lag); },
        py::arg("values"), py::arg("max_lag"));
    m.def(
        "spectral_operator_dense",
        [](std::size_t n, std::size_t bn, const std::string& kernel) {
            return esvm::weight_matrix_oracle(n, window(bn, kernel));
        },
        py::arg("n"), py::arg("bn"), py::arg("kernel") = "trapezoid");

    // targets
    py::class_<esvm::TargetModel, std::shared_ptr<esvm::TargetModel>>(m, "Target")
        .def_property_readonly("dim", &esvm::TargetModel::dim)
        .def_property_readonly("label", &esvm::TargetModel::label)
        .def_property_readonly("exact_moments", &esvm::TargetModel::exact_moments)
        .def("potential", &esvm::TargetModel::potential, py::arg("x"))
        .def("gradient", &esvm::TargetModel::gradient, py::arg("x"));
    m.def(
        "make_target",
        [](const std::string& spec) {
            return std::const_pointer_cast<esvm::TargetModel>(esvm::make_target(parse(spec)));
        },
        py::arg("spec_json"));

    // samplers
    m.def(
        "sample_chain",
        [](const std::shared_ptr<esvm::TargetModel>& target, const std::string& sampler, double gamma,
           std::size_t n_steps, std::uint64_t seed, std::uint32_t stream, std::optional<Eigen::VectorXd> x0) {
            esvm::SamplerConfig cfg{esvm::parse_sampler_kind(sampler), gamma, n_steps, {seed, stream}};
            esvm::ChainResult res = [&] {
                py::gil_scoped_release release;
                return esvm::sample_chain(cfg, *target, x0);
            }();
            return py::make_tuple(res.trajectory.states(), res.stats.rate());
        },
        py::arg("target"), py::arg("sampler"), py::arg("gamma"), py::arg("n_steps"), py::arg("seed"),
        py::arg("stream") = 0, py::arg("x0") = py::none());
    m.def(
        "ar1_reference",
        [](double a, std::size_t n, std::uint64_t seed) {
            auto ref = esvm::ar1_reference(a, n, {seed, 0});
            Eigen::VectorXd x = ref.trajectory.states().col(0);
            return py::make_tuple(x, ref.asymptotic_variance);
        },
        py::arg("a"), py::arg("n"), py::arg("seed"));

    // control variates and fitting
    m.def(
        "stein_values",
        [](const std::string& kind, const Eigen::VectorXd& theta, const esvm::StateMatrix& states,
           const esvm::StateMatrix& grads, std::size_t centers) {
            return esvm::stein_values(family(kind, static_cast<std::size_t>(states.cols()), centers), theta, states,
                                      grads);
        },
        py::arg("family"), py::arg("theta"), py::arg("states"), py::arg("grads"), py::arg("centers") = 10);
    m.def(
        "fit",
        [](const std::shared_ptr<esvm::TargetModel>& target, const esvm::StateMatrix& states, const Eigen::VectorXd& f,
           const std::string& family_kind, const std::string& criterion, std::size_t bn, std::size_t centers) {
            const esvm::Trajectory traj(states, {});
            const auto grads = esvm::gradient_matrix(*target, traj);
            const auto fam = family(family_kind, target->dim(), centers);
            const auto design = esvm::DesignSet::assemble(fam, traj, grads, f, esvm::LagWindow(bn));
            esvm::FitResult r;
            {
                py::gil_scoped_release release;
                r = esvm::fit(design, esvm::parse_criterion(criterion));
            }
            return fit_to_dict(r);
        },
        py::arg("target"), py::arg("states"), py::arg("f"), py::arg("family") = "second_order",
        py::arg("criterion") = "ESVM", py::arg("bn") = 50, py::arg("centers") = 10);

    // experiments
    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            const auto config = esvm::parse_config(parse(config_json));
            esvm::VRFReport report;
            {
                py::gil_scoped_release release;
                report = esvm::run_experiment(config);
            }
            return esvm::to_json(report).dump();
        },
        py::arg("config_json"));
    m.def(
        "emit_report",
        [](const std::string& report_json, const std::string& dir) {
            std::vector<std::string> out;
            for (const auto& p : esvm::emit_report(esvm::report_from_json(parse(report_json)), dir))
                out.push_back(p.string());
            return out;
        },
        py::arg("report_json"), py::arg("dir"));
    m.def(
        "normalize_config",
        [](const std::string& config_json) { return esvm::to_json(esvm::parse_config(parse(config_json))).dump(); },
        py::arg("config_json"));
}
