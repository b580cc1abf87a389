#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oapel {

/// Row-major so that a sample is a contiguous span.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Binary class labels, 1 = positive (high risk).
using Labels = std::vector<int>;

/// Column index lists, one per base classifier.
using FeatureSubsets = std::vector<std::vector<std::size_t>>;

inline std::span<const double> row_span(const Matrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Copy the listed rows.
Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows);
Labels take(const Labels& y, std::span<const std::size_t> rows);

/// Copy the listed columns.
Matrix take_cols(const Matrix& m, std::span<const std::size_t> cols);

}  // namespace oapel
