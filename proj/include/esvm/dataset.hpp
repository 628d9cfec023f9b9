#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace esvm {

/// Binary-response regression data after the Zellner standardization x~_i = (X^T X)^{-1/2} x_i,
/// where X is the training design matrix. Test rows are mapped with the same transform.
struct Dataset {
    Eigen::MatrixXd train_x;  // N x d, standardized
    Eigen::VectorXd train_y;  // entries in {0, 1}
    Eigen::MatrixXd test_x;   // K x d, standardized
    Eigen::VectorXd test_y;
    std::vector<std::size_t> train_rows;  // indices into the raw file (data rows, 0-based)
    std::vector<std::size_t> test_rows;
    Eigen::MatrixXd transform;  // (X^T X)^{-1/2}
    std::uint64_t split_seed = 0;
    std::string source;         // file path or "synthetic"
    std::uint64_t content_hash = 0;
};

struct DatasetOptions {
    std::string label_column;  // header name; empty means the last column
    bool add_intercept = true;
    std::size_t test_rows = 100;
    std::uint64_t split_seed = 0;
};

/// Builds a standardized dataset from raw covariates and labels. Throws ConfigError on
/// non-binary labels, a bad split size, or a rank-deficient X^T X (naming the eigenvalue).
Dataset make_dataset(const Eigen::MatrixXd& raw_x, const Eigen::VectorXd& y, const DatasetOptions& opts);

/// Reads a comma-separated file with a header row; every non-label column must be numeric.
Dataset ingest_csv(const std::filesystem::path& path, const DatasetOptions& opts);

/// Synthetic logistic data with a known generating parameter. d counts the intercept column.
struct SyntheticLogistic {
    Eigen::MatrixXd raw_x;  // without intercept: n x (d - 1)
    Eigen::VectorXd y;
    Eigen::VectorXd true_param;  // length d, intercept first
};
SyntheticLogistic make_synthetic_logistic(std::size_t n = 500, std::size_t d = 8, std::uint64_t seed = 2019);

/// FNV-1a over the file bytes.
std::uint64_t file_hash(const std::filesystem::path& path);

/// Writes {path, hash, split_seed, K, N, d} describing the dataset.
void write_dataset_manifest(const Dataset& data, const std::filesystem::path& path);

}  // namespace esvm
