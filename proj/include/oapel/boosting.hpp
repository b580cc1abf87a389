#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "oapel/random.hpp"
#include "oapel/types.hpp"

namespace oapel::boosting {

/// Regularised logistic boosting. `leaf_penalty` is the L2 coefficient on leaf
/// scores and `split_penalty` the per-leaf complexity cost of the objective.
struct BoostParams {
  int rounds = 100;
  int max_depth = 2;
  double leaf_penalty = 1.0;
  double split_penalty = 0.0;
  double step_shrinkage = 0.1;
  double min_child_hessian = 1e-6;

  /// Throws UsageError.
  void validate() const;
  bool operator==(const BoostParams&) const = default;
};

/// Split node when `feature >= 0`, otherwise a leaf holding `value`.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Binary tree stored flat; node 0 is the root. Samples with
/// x[feature] < threshold go left.
struct Tree {
  std::vector<TreeNode> nodes;

  double evaluate(std::span<const double> x) const;
  std::size_t split_count() const;
  bool operator==(const Tree&) const = default;
};

double logistic(double margin);

/// Newton leaf weight -G / (H + eta).
double leaf_score(double grad_sum, double hess_sum, double leaf_penalty);

/// Loss reduction of splitting (G_L, H_L) | (G_R, H_R).
double split_gain(double gl, double hl, double gr, double hr, double leaf_penalty, double split_penalty);

struct BoostedModel {
  double base_logit = 0.0;
  std::vector<Tree> trees;
  std::size_t feature_count = 0;
  BoostParams params;

  double margin(std::span<const double> x) const;
  bool operator==(const BoostedModel&) const = default;
};

/// Exact greedy gradient boosting on logistic loss. `seed` is accepted for
/// interface symmetry; the fit itself uses no randomness.
BoostedModel fit_boosted(const Matrix& x, const Labels& y, const BoostParams& params, std::uint64_t seed = 0);

/// Probability in (0, 1), kept at least 1e-15 away from both ends.
double predict_proba(const BoostedModel& model, std::span<const double> x);

/// Total split gain accumulated per feature.
std::vector<double> gain_importance(const BoostedModel& model);

/// Mean logistic loss on (x, y) after 0, 1, ..., trees.size() rounds.
std::vector<double> loss_trace(const BoostedModel& model, const Matrix& x, const Labels& y);

nlohmann::json to_json(const BoostedModel& model);
BoostedModel boosted_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoostParams& p);
BoostParams boost_params_from_json(const nlohmann::json& j);

// --- shared tree grower (also used by the CART baselines) -------------------

enum class SplitCriterion {
  kNewton,  // second-order gain with leaf L2 penalty; leaf = -G/(H+eta)
  kGini,    // weighted Gini decrease with g = y, h = 1; leaf = G/H
};

struct GrowConfig {
  SplitCriterion criterion = SplitCriterion::kNewton;
  int max_depth = 2;
  double leaf_penalty = 1.0;
  double split_penalty = 0.0;
  double min_child_weight = 1e-6;
  std::size_t features_per_node = 0;  // 0 = all features
};

/// Row indices of `x` sorted by each column (ties by row index).
std::vector<std::vector<std::size_t>> sort_columns(const Matrix& x);

/// Level-wise exact greedy growth. `rng` is only consulted when
/// `features_per_node` restricts the candidate features.
Tree grow_tree(const Matrix& x, const std::vector<std::vector<std::size_t>>& sorted, std::span<const double> grad,
               std::span<const double> hess, const GrowConfig& cfg, Rng* rng = nullptr);

}  // namespace oapel::boosting
