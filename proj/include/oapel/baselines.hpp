#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oapel/dataset.hpp"
#include "oapel/pipeline.hpp"

namespace oapel::baselines {

/// Comparison models. All of them standardize on the training data and share
/// the ensemble's resampling settings.
struct BaselineConfig {
  pipeline::EnsembleConfig ensemble;
  int knn_neighbors = 5;
  double lr_l2 = 1e-4;
  double lr_learning_rate = 0.1;
  int lr_epochs = 2000;
  double svm_l2 = 0.01;
  int svm_epochs = 1000;
  int tree_depth = 4;
  int forest_trees = 100;
  int forest_depth = 8;
  int bagging_models = 10;
  /// Members of the Voting and Stacking ensembles (single-model names).
  std::vector<std::string> members = {"KNN", "LR", "SVM", "DT", "RF"};

  void validate() const;
  bool operator==(const BaselineConfig&) const = default;
};

nlohmann::json to_json(const BaselineConfig& cfg);
/// Reads the baseline-specific keys; the ensemble part is passed separately.
BaselineConfig baseline_config_from_json(const nlohmann::json& j, const pipeline::EnsembleConfig& ensemble);

/// Names accepted by train_baseline.
const std::vector<std::string>& baseline_names();

/// Throws UsageError for an unknown name.
std::unique_ptr<pipeline::Classifier> train_baseline(const std::string& name, const Dataset& data,
                                                     const BaselineConfig& cfg, std::uint64_t seed);

}  // namespace oapel::baselines
