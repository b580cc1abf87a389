#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oapel/types.hpp"

namespace oapel {

/// Subjects x features with binary labels (1 = high risk).
struct Dataset {
  Matrix x;
  Labels y;
  std::vector<std::string> feature_ids;
  std::vector<std::string> subject_ids;
  /// Continuous outcome the labels were thresholded from, when known.
  std::optional<std::vector<double>> scores;

  std::size_t size() const { return y.size(); }
  std::size_t features() const { return feature_ids.size(); }
  std::size_t positives() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  /// Throws DataError on shape mismatch, non-finite cells, non-binary labels
  /// or duplicate ids.
  void validate() const;
};

inline constexpr double kDefaultLabelThreshold = 85.0;

/// Reads a features CSV (subject_id, feature columns...) and a labels CSV
/// (subject_id plus a `score` or `label` column). With a score column the
/// label is 1 when score <= threshold.
Dataset ingest_csv(const std::string& features_path, const std::string& labels_path,
                   double label_threshold = kDefaultLabelThreshold);

/// Writes the pair of files ingest_csv reads; numbers are written with
/// shortest round-trip formatting.
void write_csv(const Dataset& data, const std::string& features_path, const std::string& labels_path);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Per-feature z-scoring fitted on training data.
struct Standardizer {
  Vector mean;
  Vector sd;  // 1 where the training sd is below 1e-12

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  std::vector<double> apply(std::span<const double> x) const;
  bool operator==(const Standardizer&) const = default;
};

nlohmann::json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

}  // namespace oapel
