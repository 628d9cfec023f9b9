#include "esvm/config.hpp"

#include <fstream>

#include "esvm/error.hpp"

namespace esvm {

using nlohmann::json;

std::string FunctionalSpec::name() const {
    const auto i = "[" + std::to_string(index) + "]";
    switch (kind) {
        case Kind::Coordinate: return "mean" + i;
        case Kind::SecondMoment: return "second_moment" + i;
        case Kind::Cube: return "cube" + i;
        case Kind::TestLikelihood: return "test_likelihood";
    }
    return "?";
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

template <class T>
T require(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("config field '") + key + "' is required");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

std::string functional_kind_name(FunctionalSpec::Kind k) {
    switch (k) {
        case FunctionalSpec::Kind::Coordinate: return "coordinate";
        case FunctionalSpec::Kind::SecondMoment: return "second_moment";
        case FunctionalSpec::Kind::Cube: return "cube";
        case FunctionalSpec::Kind::TestLikelihood: return "test_likelihood";
    }
    return "?";
}

FunctionalSpec::Kind parse_functional_kind(const std::string& s) {
    if (s == "coordinate" || s == "mean") return FunctionalSpec::Kind::Coordinate;
    if (s == "second_moment") return FunctionalSpec::Kind::SecondMoment;
    if (s == "cube") return FunctionalSpec::Kind::Cube;
    if (s == "test_likelihood") return FunctionalSpec::Kind::TestLikelihood;
    throw ConfigError("unknown functional kind '" + s + "'");
}

Dataset make_regression_dataset(const json& spec) {
    DatasetOptions opts;
    opts.add_intercept = get_or<bool>(spec, "intercept", true);
    opts.test_rows = get_or<std::size_t>(spec, "test_rows", 100);
    opts.split_seed = get_or<std::uint64_t>(spec, "split_seed", 0);
    opts.label_column = get_or<std::string>(spec, "label", "");
    if (get_or<bool>(spec, "synthetic", false)) {
        const auto syn = make_synthetic_logistic(get_or<std::size_t>(spec, "n", 500), get_or<std::size_t>(spec, "d", 8),
                                                 get_or<std::uint64_t>(spec, "seed", 2019));
        opts.add_intercept = true;
        Dataset d = make_dataset(syn.raw_x, syn.y, opts);
        d.source = "synthetic";
        return d;
    }
    return ingest_csv(require<std::string>(spec, "path"), opts);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!(gamma > 0)) throw ConfigError("sampler step size must be positive");
    if (n_train < 2 || n_test < 2) throw ConfigError("n_train and n_test must be at least 2");
    if (n_test_chains < 1) throw ConfigError("n_test_chains must be positive");
    if (bn < 1 || bn > n_train) throw ConfigError("bn must lie in [1, n_train]");
    if (effective_bn_test() < 1 || effective_bn_test() > n_test) throw ConfigError("bn_test must lie in [1, n_test]");
    if (acf_max_lag >= n_train) throw ConfigError("acf_max_lag must be smaller than n_train");
    if (threads < 1) throw ConfigError("threads must be positive");
    if (persist_trajectories > n_test_chains) throw ConfigError("persist_trajectories exceeds n_test_chains");
    if (!target.is_object() || !target.contains("kind")) throw ConfigError("target block needs a 'kind'");
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    c.name = get_or<std::string>(doc, "name", c.name);
    c.target = require<json>(doc, "target");

    const json fn = get_or<json>(doc, "functional", json::object());
    c.functional.kind = parse_functional_kind(get_or<std::string>(fn, "kind", "coordinate"));
    c.functional.index = get_or<std::size_t>(fn, "index", 0);

    const json sm = require<json>(doc, "sampler");
    c.sampler = parse_sampler_kind(require<std::string>(sm, "kind"));
    c.gamma = require<double>(sm, "gamma");
    if (sm.contains("x0")) c.x0 = sm.at("x0").get<std::vector<double>>();

    c.n_burn = get_or<std::size_t>(doc, "n_burn", c.n_burn);
    c.n_train = get_or<std::size_t>(doc, "n_train", c.n_train);
    c.n_test = get_or<std::size_t>(doc, "n_test", c.n_test);
    c.n_test_chains = get_or<std::size_t>(doc, "n_test_chains", c.n_test_chains);
    c.bn = get_or<std::size_t>(doc, "bn", c.bn);
    if (doc.contains("bn_test") && !doc.at("bn_test").is_null()) c.bn_test = doc.at("bn_test").get<std::size_t>();
    c.kernel = parse_kernel_kind(get_or<std::string>(doc, "kernel", "trapezoid"));

    const json fam = get_or<json>(doc, "family", json::object());
    c.family.kind = parse_family_kind(get_or<std::string>(fam, "kind", "second_order"));
    c.family.centers = get_or<std::size_t>(fam, "r", c.family.centers);

    if (doc.contains("methods")) {
        c.methods.clear();
        for (const auto& m : doc.at("methods")) {
            const auto s = m.get<std::string>();
            if (s == "none") continue;
            c.methods.push_back(parse_criterion(s));
        }
    }
    c.seed = get_or<std::uint64_t>(doc, "seed", c.seed);
    c.output_dir = get_or<std::string>(doc, "output_dir", c.output_dir);
    c.threads = get_or<std::size_t>(doc, "threads", c.threads);
    c.acf_max_lag = get_or<std::size_t>(doc, "acf_max_lag", c.acf_max_lag);
    c.persist_trajectories = get_or<std::size_t>(doc, "persist_trajectories", c.persist_trajectories);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed config " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
    json methods = json::array();
    for (auto m : c.methods) methods.push_back(to_string(m));
    json j = {
        {"name", c.name},
        {"target", c.target},
        {"functional", {{"kind", functional_kind_name(c.functional.kind)}, {"index", c.functional.index}}},
        {"sampler", {{"kind", to_string(c.sampler)}, {"gamma", c.gamma}}},
        {"n_burn", c.n_burn},
        {"n_train", c.n_train},
        {"n_test", c.n_test},
        {"n_test_chains", c.n_test_chains},
        {"bn", c.bn},
        {"bn_test", c.effective_bn_test()},
        {"kernel", to_string(c.kernel)},
        {"family", {{"kind", to_string(c.family.kind)}, {"r", c.family.centers}}},
        {"methods", methods},
        {"seed", c.seed},
        {"acf_max_lag", c.acf_max_lag},
        {"persist_trajectories", c.persist_trajectories},
    };
    if (c.x0) j["sampler"]["x0"] = *c.x0;
    return j;
}

TargetPtr make_target(const json& spec) {
    const auto kind = require<std::string>(spec, "kind");
    if (kind == "gaussian") return standard_gaussian_target(require<std::size_t>(spec, "d"));
    if (kind == "gmm") {
        const auto mu_v = require<std::vector<double>>(spec, "mu");
        const Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mu_v.data(), static_cast<Eigen::Index>(mu_v.size()));
        Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(mu.size(), mu.size());
        if (spec.contains("sigma")) {
            const auto rows = spec.at("sigma").get<std::vector<std::vector<double>>>();
            if (rows.size() != static_cast<std::size_t>(mu.size())) throw ConfigError("gmm: sigma has wrong number of rows");
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != rows.size()) throw ConfigError("gmm: sigma must be square");
                for (std::size_t j = 0; j < rows.size(); ++j) sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            }
        }
        return gmm_target(get_or<double>(spec, "rho", 0.5), mu, sigma);
    }
    if (kind == "gmm_isolated")
        return gmm_isolated_target(require<double>(spec, "rho"), require<double>(spec, "mu1"), require<double>(spec, "sigma1"),
                                   require<double>(spec, "mu2"), require<double>(spec, "sigma2"));
    if (kind == "banana")
        return banana_target(get_or<double>(spec, "p", 100.0), get_or<double>(spec, "b", 0.1), get_or<std::size_t>(spec, "d", 2));
    if (kind == "logistic" || kind == "probit") {
        Dataset data = make_regression_dataset(require<json>(spec, "dataset"));
        const double g = get_or<double>(spec, "g", 100.0);
        if (kind == "logistic") return logistic_target(std::move(data), g);
        return probit_target(std::move(data), g);
    }
    throw ConfigError("unknown target kind '" + kind + "'");
}

ScalarFunction make_functional(const FunctionalSpec& spec, const TargetPtr& target) {
    const auto d = target->dim();
    if (spec.kind != FunctionalSpec::Kind::TestLikelihood && spec.index >= d)
        throw ConfigError("functional index " + std::to_string(spec.index) + " out of range for dimension " + std::to_string(d));
    const auto i = static_cast<Eigen::Index>(spec.index);
    switch (spec.kind) {
        case FunctionalSpec::Kind::Coordinate: return [i](const StateVector& x) { return x[i]; };
        case FunctionalSpec::Kind::SecondMoment: return [i](const StateVector& x) { return x[i] * x[i]; };
        case FunctionalSpec::Kind::Cube: return [i](const StateVector& x) { return x[i] * x[i] * x[i]; };
        case FunctionalSpec::Kind::TestLikelihood: {
            auto reg = std::dynamic_pointer_cast<const RegressionTarget>(target);
            if (!reg) throw ConfigError("test_likelihood functional needs a logistic or probit target");
            return [reg](const StateVector& x) { return reg->test_likelihood(x); };
        }
    }
    throw ConfigError("unsupported functional");
}

SteinFamily make_family(const FamilySpec& spec, std::size_t dim) {
    switch (spec.kind) {
        case SteinFamily::Kind::FirstOrder: return SteinFamily::first_order(dim);
        case SteinFamily::Kind::SecondOrder: return SteinFamily::second_order(dim);
        case SteinFamily::Kind::Rbf:
            if (dim != 1) throw ConfigError("the RBF family is only defined for one-dimensional targets");
            return SteinFamily::rbf(spec.centers);
    }
    throw ConfigError("unsupported family");
}

}  // namespace esvm
