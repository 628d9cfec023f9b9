#include "esvm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "esvm/error.hpp"
#include "esvm/numerics.hpp"
#include "esvm/rng.hpp"

namespace esvm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cell.erase(0, cell.find_first_not_of(" \t\r\""));
        const auto last = cell.find_last_not_of(" \t\r\"");
        cell.erase(last == std::string::npos ? 0 : last + 1);
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t row, std::size_t col) {
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("non-numeric value '" + s + "' at data row " + std::to_string(row) + ", column " +
                          std::to_string(col));
    return v;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng({seed, 0xda7a});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(rows[i])];
    return out;
}

}  // namespace

Dataset make_dataset(const Eigen::MatrixXd& raw_x, const Eigen::VectorXd& y, const DatasetOptions& opts) {
    const auto n = static_cast<std::size_t>(raw_x.rows());
    if (static_cast<std::size_t>(y.size()) != n) throw ConfigError("label count does not match row count");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0 && y[i] != 1.0)
            throw ConfigError("label at row " + std::to_string(i) + " is not binary: " + std::to_string(y[i]));
    }
    if (opts.test_rows >= n) throw ConfigError("test split size must be smaller than the number of rows");

    Eigen::MatrixXd x = raw_x;
    if (opts.add_intercept) {
        x.resize(raw_x.rows(), raw_x.cols() + 1);
        x.col(0).setOnes();
        x.rightCols(raw_x.cols()) = raw_x;
    }
    if (!x.allFinite()) throw ConfigError("covariates contain non-finite values");

    const auto order = shuffled_indices(n, opts.split_seed);
    Dataset data;
    data.test_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(opts.test_rows));
    data.train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(opts.test_rows), order.end());
    std::sort(data.test_rows.begin(), data.test_rows.end());
    std::sort(data.train_rows.begin(), data.train_rows.end());
    data.split_seed = opts.split_seed;

    const Eigen::MatrixXd x_train = gather_rows(x, data.train_rows);
    const Eigen::MatrixXd gram = x_train.transpose() * x_train;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition of X^T X failed");
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > 1e-10 * std::max(lmax, 1.0)))
        throw ConfigError("X^T X is rank deficient: smallest eigenvalue " + std::to_string(lmin) +
                          " (largest " + std::to_string(lmax) + ")");
    data.transform = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                     eig.eigenvectors().transpose();

    data.train_x = x_train * data.transform;  // rows: (T x_i)^T, T symmetric
    data.train_y = gather(y, data.train_rows);
    data.test_x = gather_rows(x, data.test_rows) * data.transform;
    data.test_y = gather(y, data.test_rows);
    return data;
}

Dataset ingest_csv(const std::filesystem::path& path, const DatasetOptions& opts) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("dataset has no header row: " + path.string());
    const auto header = split_csv_line(line);
    if (header.size() < 2) throw ConfigError("dataset needs at least one feature and a label: " + path.string());

    std::size_t label_col = header.size() - 1;
    if (!opts.label_column.empty()) {
        const auto it = std::find(header.begin(), header.end(), opts.label_column);
        if (it == header.end()) throw ConfigError("label column '" + opts.label_column + "' not found in " + path.string());
        label_col = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ConfigError("row " + std::to_string(rows.size()) + " has " + std::to_string(cells.size()) +
                              " fields, header has " + std::to_string(header.size()));
        std::vector<double> feats;
        feats.reserve(cells.size() - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double v = parse_double(cells[c], rows.size(), c);
            if (c == label_col) labels.push_back(v);
            else feats.push_back(v);
        }
        rows.push_back(std::move(feats));
    }
    if (rows.empty()) throw ConfigError("dataset has no data rows: " + path.string());

    Eigen::MatrixXd raw(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()));

    Dataset data = make_dataset(raw, y, opts);
    data.source = path.string();
    data.content_hash = file_hash(path);
    return data;
}

SyntheticLogistic make_synthetic_logistic(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (d < 2) throw ConfigError("synthetic logistic data needs d >= 2 (intercept plus one feature)");
    SyntheticLogistic out;
    Rng rng({seed, 0x5e7});
    out.true_param.resize(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < out.true_param.size(); ++j)
        out.true_param[j] = (j % 2 == 0 ? 1.0 : -1.0) * (0.25 + 0.75 * static_cast<double>(j) / static_cast<double>(d));
    out.raw_x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d - 1));
    out.y.resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < out.raw_x.rows(); ++i) {
        double z = out.true_param[0];
        for (Eigen::Index j = 0; j < out.raw_x.cols(); ++j) {
            out.raw_x(i, j) = rng.normal();
            z += out.true_param[j + 1] * out.raw_x(i, j);
        }
        out.y[i] = rng.uniform() < numerics::sigmoid(z) ? 1.0 : 0.0;
    }
    return out;
}

std::uint64_t file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for hashing: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

void write_dataset_manifest(const Dataset& data, const std::filesystem::path& path) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(data.content_hash));
    const nlohmann::json j = {
        {"path", data.source},
        {"hash", std::string(hex)},
        {"split_seed", data.split_seed},
        {"K", data.test_rows.size()},
        {"N", data.train_rows.size()},
        {"d", data.train_x.cols()},
    };
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace esvm
