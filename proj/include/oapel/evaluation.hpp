#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oapel/baselines.hpp"
#include "oapel/dataset.hpp"
#include "oapel/pipeline.hpp"

namespace oapel::evaluation {

struct EvalMetrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double auc = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool operator==(const EvalMetrics&) const = default;
};

nlohmann::json to_json(const EvalMetrics& m);

/// Confusion counts at `threshold` (p >= threshold is positive) plus AUC.
/// Throws DataError on empty or single-class input.
EvalMetrics classify_metrics(std::span<const double> probs, const Labels& labels, double threshold = 0.5);

/// Mann-Whitney form: fraction of (positive, negative) pairs ranked correctly,
/// ties counted as one half.
double auc(std::span<const double> scores, const Labels& labels);

/// Fits a classifier on a training fold. Only the training fold is passed, so
/// a held-out sample cannot influence anything the trainer computes.
using Trainer = std::function<std::unique_ptr<pipeline::Classifier>(const Dataset& train, const pipeline::HyperParams& hp,
                                                                    std::uint64_t seed)>;

struct HyperGrid {
  std::vector<double> meta_l2 = {0.001, 0.01, 0.1};
  std::vector<int> max_depth = {2, 4, 6, 8};
  /// Row-major over (meta_l2, max_depth).
  std::vector<pipeline::HyperParams> points() const;
  bool operator==(const HyperGrid&) const = default;
};

struct LoocvResult {
  std::vector<std::size_t> indices;  // evaluated samples, ascending
  std::vector<double> probs;         // held-out probability per evaluated sample
  Labels labels;
  std::vector<std::vector<double>> base_probs;  // per evaluated sample; empty for single models
  std::vector<pipeline::HyperParams> chosen;    // per evaluated sample
  std::size_t skipped = 0;                      // folds whose training part had one class
};

/// Runs fn(0..n-1) on up to `threads` workers. fn must only write to
/// per-index slots; results therefore do not depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Fold i trains with seed derive_seed(seed, i), so two trainers evaluated
/// with the same seed see identical fold seeds.
LoocvResult loocv(const Dataset& data, const Trainer& trainer, const pipeline::HyperParams& hp, std::uint64_t seed,
                  int threads = 1);

/// Outer LOOCV; inside each outer fold every grid point is scored by the
/// pooled AUC of an inner LOOCV over the N-1 training samples, the best point
/// (first on ties) is refitted on all N-1 and predicts the held-out sample.
LoocvResult nested_loocv(const Dataset& data, const Trainer& trainer, const HyperGrid& grid, std::uint64_t seed,
                         int threads = 1);

struct KappaErrorPoint {
  std::size_t i = 0, j = 0;
  double kappa = 0.0;
  double mean_error = 0.0;
};

/// Pairwise kappa of two classifiers' 0/1 predictions against `labels`.
/// Throws NumericalError when the denominator vanishes.
KappaErrorPoint kappa_pair(const Labels& a, const Labels& b, const Labels& labels);

/// Kappa from the agreement proportions (a both correct, b only first,
/// c only second, d both wrong).
double kappa_from_table(double a, double b, double c, double d);

/// All pairs i < j of `preds` (one prediction vector per classifier).
std::vector<KappaErrorPoint> kappa_error_cloud(const std::vector<Labels>& preds, const Labels& labels);

/// Thresholds per-sample base probabilities into one 0/1 vector per base classifier.
std::vector<Labels> base_predictions(const LoocvResult& r, double threshold = 0.5);

double mean_kappa(const std::vector<KappaErrorPoint>& cloud);

std::string kappa_cloud_csv(const std::vector<KappaErrorPoint>& cloud);

struct Rates {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double auc = 0.0;
};

struct MetricSummary {
  Rates mean;
  Rates sd;  // sample standard deviation (n - 1); zero for one replication
};

struct Replication {
  std::uint64_t seed = 0;
  EvalMetrics metrics;
  std::size_t skipped = 0;
  std::optional<double> mean_kappa;  // ensembles only
  std::vector<double> probs;
};

struct ExperimentReport {
  std::string model;
  std::vector<Replication> replications;
  MetricSummary summary;
  /// One confusion matrix and AUC over the predictions of all replications.
  EvalMetrics pooled;
  nlohmann::json config;
};

MetricSummary summarize(const std::vector<EvalMetrics>& per_replication);

struct ReplicationOptions {
  std::size_t replications = 100;
  bool nested = true;
  HyperGrid grid;
  pipeline::HyperParams fixed;  // used when nested is false
  double threshold = 0.5;
  int threads = 1;
};

/// Replication r uses seed derive_seed(master_seed, r).
ExperimentReport run_replications(const std::string& model_name, const Dataset& data, const Trainer& trainer,
                                  const ReplicationOptions& opts, std::uint64_t master_seed);

nlohmann::json to_json(const ExperimentReport& r);

struct SweepResult {
  std::vector<std::size_t> ks;
  std::vector<double> mean_auc;
  std::vector<double> sd_auc;
  std::size_t best_k = 0;  // highest mean AUC, smallest k on ties
};

/// Argmax over per-k mean AUCs produced by `evaluate`.
SweepResult sweep_k(const std::vector<std::size_t>& ks,
                    const std::function<std::vector<double>(std::size_t k)>& evaluate);

/// OAP-EL with plain LOOCV at the fixed hyperparameters, `reps` replications per k.
SweepResult sweep_k(const Dataset& data, const ontology::OntologyGraph& graph, const std::vector<std::size_t>& ks,
                    std::size_t reps, const pipeline::EnsembleConfig& cfg, const pipeline::HyperParams& hp,
                    std::uint64_t seed, int threads = 1);

/// Trainer for "OAP-EL", "AB-EL" or any baseline name. `graph` is required
/// for OAP-EL unless `forced` is given; with `forced`, both ensemble arms
/// train on those subsets instead of deriving their own.
Trainer make_trainer(const std::string& name, const baselines::BaselineConfig& cfg,
                     const ontology::OntologyGraph* graph, std::size_t k, const FeatureSubsets* forced = nullptr);

/// "OAP-EL", "AB-EL" followed by the baseline names.
std::vector<std::string> model_names();

}  // namespace oapel::evaluation
