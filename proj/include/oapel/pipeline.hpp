#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oapel/boosting.hpp"
#include "oapel/dataset.hpp"
#include "oapel/metanet.hpp"
#include "oapel/ontology.hpp"
#include "oapel/resampling.hpp"
#include "oapel/spectral.hpp"

namespace oapel::pipeline {

/// How the meta-classifier's training inputs are produced.
enum class StackingMode {
  kInFold,     // base models predict the same (resampled) rows they were fitted on
  kOutOfFold,  // each row is predicted by base models fitted without its fold
};

StackingMode parse_stacking_mode(const std::string& name);
std::string to_string(StackingMode mode);

struct EnsembleConfig {
  boosting::BoostParams boost;
  metanet::MetaTrainConfig meta;  // seed is replaced by a derived seed
  resampling::ResampleConfig resample;  // seed is replaced by a derived seed
  bool resample_enabled = true;
  StackingMode stacking = StackingMode::kInFold;
  int stacking_folds = 5;
  spectral::LaplacianKind laplacian = spectral::LaplacianKind::kUnnormalized;
  std::size_t ab_subset_size = 0;  // 0 selects ceil(d / k)

  void validate() const;
  bool operator==(const EnsembleConfig&) const = default;
};

nlohmann::json to_json(const EnsembleConfig& cfg);
EnsembleConfig ensemble_config_from_json(const nlohmann::json& j);

/// Hyperparameters searched by the inner validation loop.
struct HyperParams {
  double meta_l2 = 0.001;
  int max_depth = 2;
  bool operator==(const HyperParams&) const = default;
};

EnsembleConfig with_hyper(EnsembleConfig cfg, const HyperParams& hp);

/// Anything that maps a raw feature vector to P(y = 1).
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual double predict_proba(std::span<const double> x) const = 0;
  /// Per-base-classifier probabilities for ensembles, empty otherwise.
  virtual std::vector<double> base_probabilities(std::span<const double> /*x*/) const { return {}; }
};

/// Fitted stacking ensemble: standardizer, one boosted model per feature
/// subset, meta net over their probabilities.
struct EnsembleModel {
  std::vector<std::string> feature_ids;
  std::string partition_source;  // "ontology", "attribute_bagging" or "forced"
  FeatureSubsets subsets;
  Standardizer standardizer;
  std::vector<boosting::BoostedModel> base;
  metanet::MetaNet meta;
  EnsembleConfig config;
  std::uint64_t seed = 0;

  std::size_t k() const { return subsets.size(); }
  bool operator==(const EnsembleModel&) const = default;
};

class EnsembleClassifier final : public Classifier {
 public:
  explicit EnsembleClassifier(EnsembleModel model) : model_(std::move(model)) {}
  double predict_proba(std::span<const double> x) const override;
  std::vector<double> base_probabilities(std::span<const double> x) const override;
  const EnsembleModel& model() const { return model_; }

 private:
  EnsembleModel model_;
};

/// Shared by OAP-EL and AB-EL: everything downstream of the feature subsets.
/// Randomness is drawn from streams of `seed` that do not depend on the
/// subsets, so two calls differing only in subsets are controlled comparisons.
EnsembleModel train_with_subsets(const Dataset& data, FeatureSubsets subsets, std::string source,
                                 const EnsembleConfig& cfg, std::uint64_t seed);

/// Seed train_oap_el hands to spectral_partition for master seed `seed`.
std::uint64_t spectral_seed(std::uint64_t seed);

/// Ontology-guided ensemble: spectral partition of `graph` into k subsets.
EnsembleModel train_oap_el(const Dataset& data, const ontology::OntologyGraph& graph, std::size_t k,
                           const EnsembleConfig& cfg, std::uint64_t seed);

/// k uniformly random feature subsets of `subset_size` distinct features each
/// (0 selects ceil(d / k)); subsets are drawn independently and may overlap.
FeatureSubsets draw_attribute_bags(std::size_t d, std::size_t k, std::size_t subset_size, std::uint64_t seed);

EnsembleModel train_ab_el(const Dataset& data, std::size_t k, std::size_t subset_size, const EnsembleConfig& cfg,
                          std::uint64_t seed);

/// Standardize, route columns, stack base probabilities, meta forward.
double predict(const EnsembleModel& model, std::span<const double> x);
std::vector<double> predict_batch(const EnsembleModel& model, const Matrix& x);
std::vector<double> base_probabilities(const EnsembleModel& model, std::span<const double> x);

struct RankedFeature {
  std::string id;
  std::string region;
  std::string metric;
  double score;
};

/// Two-level importance: (w_i / sum w) * (beta_ij / max B_i) with
/// w_i = sum_h |W1[h, i]|. Sorted by descending score, ties by id. A feature
/// in several subsets keeps its best score.
std::vector<RankedFeature> rank_features(const EnsembleModel& model);

/// Meta weight share per subset; sums to 1 (uniform when all weights vanish).
std::vector<double> subset_weight_shares(const EnsembleModel& model);

nlohmann::json to_json(const EnsembleModel& model);
EnsembleModel ensemble_from_json(const nlohmann::json& j);

/// Throws DataError naming the ids that differ.
void check_feature_ids(const std::vector<std::string>& expected, const std::vector<std::string>& actual);

/// Reorders the columns of `data` to follow `ids`. Throws DataError (listing
/// the offending ids) when the id sets differ.
Dataset align_features(const Dataset& data, const std::vector<std::string>& ids);

/// Lower-level piece of the ensemble preprocessing, reused by baselines:
/// standardize on `data`, then SMOTE-ENN when enabled.
struct Prepared {
  Standardizer standardizer;
  Matrix x;
  Labels y;
};
Prepared prepare_training(const Dataset& data, const EnsembleConfig& cfg, std::uint64_t seed);

}  // namespace oapel::pipeline
