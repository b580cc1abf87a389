#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "oapel/types.hpp"

namespace oapel::resampling {

struct ResampleConfig {
  int smote_neighbors = 5;
  int enn_neighbors = 3;
  double target_ratio = 1.0;  // minority : majority after SMOTE
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const ResampleConfig&) const = default;
};

/// A SMOTE sample: x = x[parent] + u * (x[neighbor] - x[parent]).
struct SyntheticOrigin {
  std::size_t parent;
  std::size_t neighbor;
  double u;
};

struct Resampled {
  Matrix x;
  Labels y;
  /// SMOTE output rows are the originals followed by one row per entry here.
  std::vector<SyntheticOrigin> synthetic;
  /// ENN: rows of its input that survived, ascending.
  std::vector<std::size_t> kept;
  /// Minority/majority count ratio right after SMOTE.
  double post_smote_ratio = 0.0;
};

/// Indices of the k nearest rows of `x` to row `i` among `candidates`
/// (self excluded), nearest first; distance ties go to the lower index.
std::vector<std::size_t> nearest_neighbors(const Matrix& x, std::size_t i, const std::vector<std::size_t>& candidates,
                                           std::size_t k);

/// Oversamples the minority class until minority >= target * majority.
/// Balanced (or already on-target) input is returned unchanged. Throws
/// DataError when the minority class has fewer than two samples.
Resampled smote(const Matrix& x, const Labels& y, const ResampleConfig& cfg);

/// Edited nearest neighbours, one pass: drops every sample whose label
/// disagrees with the strict majority of its enn_neighbors nearest neighbours.
/// A tied vote keeps the sample. Throws DataError when n <= enn_neighbors.
Resampled enn(const Matrix& x, const Labels& y, const ResampleConfig& cfg);

/// smote followed by enn.
Resampled smote_enn(const Matrix& x, const Labels& y, const ResampleConfig& cfg);

nlohmann::json to_json(const ResampleConfig& cfg);
ResampleConfig resample_config_from_json(const nlohmann::json& j);

}  // namespace oapel::resampling
