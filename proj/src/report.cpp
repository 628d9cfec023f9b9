#include "esvm/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "esvm/error.hpp"

namespace esvm {

using nlohmann::json;

Quartiles quartiles(std::vector<double> v) {
    if (v.empty()) return {};
    std::sort(v.begin(), v.end());
    auto at = [&](double q) {
        const double pos = q * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    return {v.front(), at(0.25), at(0.5), at(0.75), v.back()};
}

const MethodReport* VRFReport::find(const std::string& label) const {
    for (const auto& m : methods)
        if (m.label == label) return &m;
    return nullptr;
}

namespace {

json to_json(const Quartiles& q) {
    return {{"min", q.min}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"max", q.max}};
}

Quartiles quartiles_from(const json& j) {
    return {j.at("min").get<double>(), j.at("q1").get<double>(), j.at("median").get<double>(), j.at("q3").get<double>(),
            j.at("max").get<double>()};
}

json to_json(const BoxplotData& b) {
    json j = {{"raw", to_json(b.raw)}, {"centered", nullptr}};
    if (b.centered) j["centered"] = to_json(*b.centered);
    return j;
}

BoxplotData boxplot_from(const json& j) {
    BoxplotData b;
    b.raw = quartiles_from(j.at("raw"));
    if (!j.at("centered").is_null()) b.centered = quartiles_from(j.at("centered"));
    return b;
}

}  // namespace

json to_json(const MethodReport& m) {
    return {
        {"label", m.label},
        {"criterion", m.criterion},
        {"theta", {{"family", m.theta.family}, {"d", m.theta.dim}, {"r", m.theta.centers}, {"params", m.theta.params}}},
        {"fit",
         {{"method", m.fit.method},
          {"iterations", m.fit.iterations},
          {"converged", m.fit.converged},
          {"objective_at_theta", m.fit.objective_at_theta},
          {"objective_at_zero", m.fit.objective_at_zero},
          {"bn_train", m.fit.bn_train},
          {"note", m.fit.note}}},
        {"spectral_adjusted", m.spectral_adjusted},
        {"vrf", m.vrf},
        {"vrf_infinite", m.vrf_infinite},
        {"averages", m.averages},
        {"mean_vrf", m.mean_vrf},
        {"infinite_count", m.infinite_count},
        {"boxplot", to_json(m.boxplot)},
    };
}

MethodReport method_report_from_json(const json& j) {
    MethodReport m;
    m.label = j.at("label").get<std::string>();
    m.criterion = j.at("criterion").get<std::string>();
    const auto& t = j.at("theta");
    m.theta = {t.at("family").get<std::string>(), t.at("d").get<std::size_t>(), t.at("r").get<std::size_t>(),
               t.at("params").get<std::vector<double>>()};
    const auto& f = j.at("fit");
    m.fit = {f.at("method").get<std::string>(),       f.at("iterations").get<std::size_t>(),
             f.at("converged").get<bool>(),           f.at("objective_at_theta").get<double>(),
             f.at("objective_at_zero").get<double>(), f.at("bn_train").get<std::size_t>(),
             f.at("note").get<std::string>()};
    m.spectral_adjusted = j.at("spectral_adjusted").get<std::vector<double>>();
    m.vrf = j.at("vrf").get<std::vector<double>>();
    m.vrf_infinite = j.at("vrf_infinite").get<std::vector<bool>>();
    m.averages = j.at("averages").get<std::vector<double>>();
    m.mean_vrf = j.at("mean_vrf").get<double>();
    m.infinite_count = j.at("infinite_count").get<std::size_t>();
    m.boxplot = boxplot_from(j.at("boxplot"));
    return m;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << std::setprecision(17);
    return out;
}

void write_quartile_cells(std::ostream& out, const std::optional<Quartiles>& q) {
    if (q) out << ',' << q->min << ',' << q->q1 << ',' << q->median << ',' << q->q3 << ',' << q->max;
    else out << ",,,,,";
}

}  // namespace

json to_json(const VRFReport& r) {
    json methods = json::array();
    for (const auto& m : r.methods) methods.push_back(to_json(m));
    return {
        {"schema_version", r.schema_version},
        {"config", r.config},
        {"target", r.target_label},
        {"functional", r.functional},
        {"exact_value", r.exact_value ? json(*r.exact_value) : json(nullptr)},
        {"bn_test", r.bn_test},
        {"train_acceptance", r.train_acceptance},
        {"test_acceptance", r.test_acceptance},
        {"spectral_vanilla", r.spectral_vanilla},
        {"vanilla_averages", r.vanilla_averages},
        {"vanilla_boxplot", to_json(r.vanilla_boxplot)},
        {"methods", methods},
        {"timings_ms", r.timings_ms},
        {"timestamp", r.timestamp},
    };
}

VRFReport report_from_json(const json& j) {
    VRFReport r;
    try {
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kReportSchemaVersion)
            throw ConfigError("unsupported report schema version " + std::to_string(r.schema_version));
        r.config = j.at("config");
        r.target_label = j.at("target").get<std::string>();
        r.functional = j.at("functional").get<std::string>();
        if (!j.at("exact_value").is_null()) r.exact_value = j.at("exact_value").get<double>();
        r.bn_test = j.at("bn_test").get<std::size_t>();
        r.train_acceptance = j.at("train_acceptance").get<double>();
        r.test_acceptance = j.at("test_acceptance").get<std::vector<double>>();
        r.spectral_vanilla = j.at("spectral_vanilla").get<std::vector<double>>();
        r.vanilla_averages = j.at("vanilla_averages").get<std::vector<double>>();
        r.vanilla_boxplot = boxplot_from(j.at("vanilla_boxplot"));
        for (const auto& m : j.at("methods")) r.methods.push_back(method_report_from_json(m));
        r.timings_ms = j.at("timings_ms").get<std::map<std::string, double>>();
        r.timestamp = j.at("timestamp").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed report: ") + e.what());
    }
    return r;
}

json deterministic_view(const VRFReport& report) {
    json j = to_json(report);
    j.erase("timings_ms");
    j.erase("timestamp");
    return j;
}

std::vector<std::filesystem::path> emit_report(const VRFReport& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    std::vector<std::filesystem::path> written;
    {
        const auto path = dir / "report.json";
        auto out = open_out(path);
        out << to_json(r).dump(2) << '\n';
        if (!out) throw IoError("write failed: " + path.string());
        written.push_back(path);
    }
    {
        const auto path = dir / "vrf.csv";
        auto out = open_out(path);
        out << "method,chain,vanilla_spectral,adjusted_spectral,vrf,infinite,vanilla_average,adjusted_average\n";
        for (const auto& m : r.methods) {
            for (std::size_t i = 0; i < m.vrf.size(); ++i) {
                out << m.label << ',' << i + 1 << ',' << r.spectral_vanilla[i] << ',' << m.spectral_adjusted[i] << ','
                    << m.vrf[i] << ',' << (m.vrf_infinite[i] ? 1 : 0) << ',' << r.vanilla_averages[i] << ','
                    << m.averages[i] << '\n';
            }
        }
        if (!out) throw IoError("write failed: " + path.string());
        written.push_back(path);
    }
    {
        const auto path = dir / "boxplot.csv";
        auto out = open_out(path);
        out << "method,min,q1,median,q3,max,centered_min,centered_q1,centered_median,centered_q3,centered_max\n";
        out << "vanilla";
        write_quartile_cells(out, r.vanilla_boxplot.raw);
        write_quartile_cells(out, r.vanilla_boxplot.centered);
        out << '\n';
        for (const auto& m : r.methods) {
            out << m.label;
            write_quartile_cells(out, m.boxplot.raw);
            write_quartile_cells(out, m.boxplot.centered);
            out << '\n';
        }
        if (!out) throw IoError("write failed: " + path.string());
        written.push_back(path);
    }
    return written;
}

VRFReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report: " + path.string());
    try {
        return report_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw IoError("malformed report " + path.string() + ": " + e.what());
    }
}

void write_acf_csv(const std::vector<double>& acf, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "lag,acf\n";
    for (std::size_t s = 0; s < acf.size(); ++s) out << s << ',' << acf[s] << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace esvm
