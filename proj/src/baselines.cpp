#include "oapel/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oapel/boosting.hpp"
#include "oapel/error.hpp"
#include "oapel/metanet.hpp"
#include "oapel/random.hpp"
#include "oapel/resampling.hpp"

namespace oapel::baselines {

using pipeline::Classifier;

namespace {

constexpr double kProbFloor = 1e-15;

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

class KnnClassifier final : public Classifier {
 public:
  KnnClassifier(Standardizer s, Matrix x, Labels y, int k) : s_(std::move(s)), x_(std::move(x)), y_(std::move(y)), k_(k) {}

  double predict_proba(std::span<const double> raw) const override {
    const auto z = s_.apply(raw);
    const Eigen::Map<const Eigen::RowVectorXd> q(z.data(), static_cast<Eigen::Index>(z.size()));
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(y_.size());
    for (Eigen::Index r = 0; r < x_.rows(); ++r) d.emplace_back((x_.row(r) - q).squaredNorm(), static_cast<std::size_t>(r));
    const auto k = std::min(static_cast<std::size_t>(k_), d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    double pos = 0.0;
    for (std::size_t t = 0; t < k; ++t) pos += y_[d[t].second];
    return clamp_prob(pos / static_cast<double>(k));
  }

 private:
  Standardizer s_;
  Matrix x_;
  Labels y_;
  int k_;
};

class LinearClassifier final : public Classifier {
 public:
  LinearClassifier(Standardizer s, Vector w, double b) : s_(std::move(s)), w_(std::move(w)), b_(b) {}

  double predict_proba(std::span<const double> raw) const override {
    const auto z = s_.apply(raw);
    double m = b_;
    for (std::size_t j = 0; j < z.size(); ++j) m += w_(static_cast<Eigen::Index>(j)) * z[j];
    return clamp_prob(boosting::logistic(m));
  }

 private:
  Standardizer s_;
  Vector w_;
  double b_;
};

class TreeEnsembleClassifier final : public Classifier {
 public:
  TreeEnsembleClassifier(Standardizer s, std::vector<boosting::Tree> trees) : s_(std::move(s)), trees_(std::move(trees)) {}

  double predict_proba(std::span<const double> raw) const override {
    const auto z = s_.apply(raw);
    double p = 0.0;
    for (const auto& t : trees_) p += t.evaluate(z);
    return clamp_prob(p / static_cast<double>(trees_.size()));
  }

 private:
  Standardizer s_;
  std::vector<boosting::Tree> trees_;
};

class NetClassifier final : public Classifier {
 public:
  NetClassifier(Standardizer s, metanet::MetaNet net) : s_(std::move(s)), net_(std::move(net)) {}
  double predict_proba(std::span<const double> raw) const override { return metanet::forward(net_, s_.apply(raw)); }

 private:
  Standardizer s_;
  metanet::MetaNet net_;
};

class BaggedBoostClassifier final : public Classifier {
 public:
  BaggedBoostClassifier(Standardizer s, std::vector<boosting::BoostedModel> models)
      : s_(std::move(s)), models_(std::move(models)) {}

  double predict_proba(std::span<const double> raw) const override {
    const auto z = s_.apply(raw);
    double p = 0.0;
    for (const auto& m : models_) p += boosting::predict_proba(m, z);
    return p / static_cast<double>(models_.size());
  }
  std::vector<double> base_probabilities(std::span<const double> raw) const override {
    const auto z = s_.apply(raw);
    std::vector<double> out;
    for (const auto& m : models_) out.push_back(boosting::predict_proba(m, z));
    return out;
  }

 private:
  Standardizer s_;
  std::vector<boosting::BoostedModel> models_;
};

class VotingClassifier final : public Classifier {
 public:
  explicit VotingClassifier(std::vector<std::unique_ptr<Classifier>> members) : members_(std::move(members)) {}

  // Fraction of members voting positive: the hard-majority decision at 0.5
  // and a graded score for ranking metrics.
  double predict_proba(std::span<const double> raw) const override {
    double votes = 0.0;
    for (const auto& m : members_) votes += m->predict_proba(raw) >= 0.5 ? 1.0 : 0.0;
    return clamp_prob(votes / static_cast<double>(members_.size()));
  }
  std::vector<double> base_probabilities(std::span<const double> raw) const override {
    std::vector<double> out;
    for (const auto& m : members_) out.push_back(m->predict_proba(raw));
    return out;
  }

 private:
  std::vector<std::unique_ptr<Classifier>> members_;
};

class StackingClassifier final : public Classifier {
 public:
  StackingClassifier(std::vector<std::unique_ptr<Classifier>> members, metanet::MetaNet meta)
      : members_(std::move(members)), meta_(std::move(meta)) {}

  double predict_proba(std::span<const double> raw) const override { return metanet::forward(meta_, base_probabilities(raw)); }
  std::vector<double> base_probabilities(std::span<const double> raw) const override {
    std::vector<double> out;
    for (const auto& m : members_) out.push_back(m->predict_proba(raw));
    return out;
  }

 private:
  std::vector<std::unique_ptr<Classifier>> members_;
  metanet::MetaNet meta_;
};

std::vector<double> signed_labels(const Labels& y) {
  std::vector<double> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) s[i] = y[i] ? 1.0 : -1.0;
  return s;
}

std::unique_ptr<Classifier> fit_logistic(const pipeline::Prepared& p, const BaselineConfig& cfg) {
  const auto n = static_cast<double>(p.y.size());
  Vector w = Vector::Zero(p.x.cols());
  double b = 0.0;
  Vector y(static_cast<Eigen::Index>(p.y.size()));
  for (std::size_t i = 0; i < p.y.size(); ++i) y(static_cast<Eigen::Index>(i)) = p.y[i];
  for (int epoch = 0; epoch < cfg.lr_epochs; ++epoch) {
    Vector m = p.x * w;
    m.array() += b;
    const Vector r = m.unaryExpr([](double v) { return boosting::logistic(v); }) - y;
    const Vector gw = p.x.transpose() * r / n + 2.0 * cfg.lr_l2 * w;
    w -= cfg.lr_learning_rate * gw;
    b -= cfg.lr_learning_rate * r.sum() / n;
  }
  return std::make_unique<LinearClassifier>(p.standardizer, std::move(w), b);
}

// Soft-margin linear SVM: min  l2/2 |w|^2 + mean hinge, full-batch
// subgradient steps of size 1 / (l2 * t).
std::unique_ptr<Classifier> fit_svm(const pipeline::Prepared& p, const BaselineConfig& cfg) {
  const auto s = signed_labels(p.y);
  const auto n = static_cast<double>(p.y.size());
  Vector w = Vector::Zero(p.x.cols());
  double b = 0.0;
  for (int t = 1; t <= cfg.svm_epochs; ++t) {
    const double eta = 1.0 / (cfg.svm_l2 * static_cast<double>(t));
    Vector gw = cfg.svm_l2 * w;
    double gb = 0.0;
    for (Eigen::Index i = 0; i < p.x.rows(); ++i) {
      const double si = s[static_cast<std::size_t>(i)];
      if (si * (p.x.row(i).dot(w) + b) < 1.0) {
        gw -= (si / n) * p.x.row(i).transpose();
        gb -= si / n;
      }
    }
    w -= eta * gw;
    b -= eta * gb;
  }
  return std::make_unique<LinearClassifier>(p.standardizer, std::move(w), b);
}

std::vector<boosting::Tree> fit_cart(const Matrix& x, const Labels& y, int trees, int depth, bool bootstrap,
                                     std::size_t features_per_node, std::uint64_t seed) {
  boosting::GrowConfig g;
  g.criterion = boosting::SplitCriterion::kGini;
  g.max_depth = depth;
  g.min_child_weight = 1.0;
  g.features_per_node = features_per_node;
  Rng rng(seed);
  std::vector<boosting::Tree> out;
  const auto n = y.size();
  for (int t = 0; t < trees; ++t) {
    std::vector<std::size_t> rows(n);
    if (bootstrap)
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    else
      std::iota(rows.begin(), rows.end(), 0);
    const Matrix xb = take_rows(x, rows);
    const auto yb = take(y, rows);
    std::vector<double> grad(n), hess(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) grad[i] = yb[i];
    out.push_back(boosting::grow_tree(xb, boosting::sort_columns(xb), grad, hess, g, &rng));
  }
  return out;
}

std::vector<std::unique_ptr<Classifier>> train_members(const Dataset& data, const BaselineConfig& cfg, std::uint64_t seed) {
  std::vector<std::unique_ptr<Classifier>> members;
  for (std::size_t m = 0; m < cfg.members.size(); ++m)
    members.push_back(train_baseline(cfg.members[m], data, cfg, derive_seed(seed, 100 + m)));
  return members;
}

bool is_single_model(const std::string& name) {
  return name == "KNN" || name == "LR" || name == "SVM" || name == "DT" || name == "RF" || name == "NN";
}

}  // namespace

void BaselineConfig::validate() const {
  ensemble.validate();
  if (knn_neighbors < 1) throw UsageError("baselines: knn_neighbors must be >= 1");
  if (lr_epochs < 1 || svm_epochs < 1) throw UsageError("baselines: epochs must be >= 1");
  if (!(svm_l2 > 0.0)) throw UsageError("baselines: svm_l2 must be > 0");
  if (!(lr_l2 >= 0.0) || !(lr_learning_rate > 0.0)) throw UsageError("baselines: invalid logistic regression settings");
  if (tree_depth < 1 || forest_depth < 1 || forest_trees < 1 || bagging_models < 1)
    throw UsageError("baselines: tree settings must be >= 1");
  if (members.empty()) throw UsageError("baselines: members must not be empty");
  for (const auto& m : members)
    if (!is_single_model(m)) throw UsageError("baselines: member '" + m + "' is not a single-model baseline");
}

nlohmann::json to_json(const BaselineConfig& cfg) {
  return {{"knn_neighbors", cfg.knn_neighbors}, {"lr_l2", cfg.lr_l2},
          {"lr_learning_rate", cfg.lr_learning_rate}, {"lr_epochs", cfg.lr_epochs},
          {"svm_l2", cfg.svm_l2},                     {"svm_epochs", cfg.svm_epochs},
          {"tree_depth", cfg.tree_depth},             {"forest_trees", cfg.forest_trees},
          {"forest_depth", cfg.forest_depth},         {"bagging_models", cfg.bagging_models},
          {"members", cfg.members}};
}

BaselineConfig baseline_config_from_json(const nlohmann::json& j, const pipeline::EnsembleConfig& ensemble) {
  BaselineConfig cfg;
  cfg.ensemble = ensemble;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "knn_neighbors")
        cfg.knn_neighbors = value.get<int>();
      else if (key == "lr_l2")
        cfg.lr_l2 = value.get<double>();
      else if (key == "lr_learning_rate")
        cfg.lr_learning_rate = value.get<double>();
      else if (key == "lr_epochs")
        cfg.lr_epochs = value.get<int>();
      else if (key == "svm_l2")
        cfg.svm_l2 = value.get<double>();
      else if (key == "svm_epochs")
        cfg.svm_epochs = value.get<int>();
      else if (key == "tree_depth")
        cfg.tree_depth = value.get<int>();
      else if (key == "forest_trees")
        cfg.forest_trees = value.get<int>();
      else if (key == "forest_depth")
        cfg.forest_depth = value.get<int>();
      else if (key == "bagging_models")
        cfg.bagging_models = value.get<int>();
      else if (key == "members")
        cfg.members = value.get<std::vector<std::string>>();
      else
        throw UsageError("baselines: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("baselines: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

const std::vector<std::string>& baseline_names() {
  static const std::vector<std::string> names = {"KNN", "LR", "SVM", "DT", "RF", "NN", "Voting", "Bagging", "Stacking"};
  return names;
}

std::unique_ptr<Classifier> train_baseline(const std::string& name, const Dataset& data, const BaselineConfig& cfg,
                                           std::uint64_t seed) {
  if (std::find(baseline_names().begin(), baseline_names().end(), name) == baseline_names().end())
    throw UsageError("unknown baseline '" + name + "'");
  cfg.validate();
  data.validate();
  const auto pos = data.positives();
  if (pos == 0 || pos == data.size()) throw DataError("training data contains a single class");

  if (name == "Voting") return std::make_unique<VotingClassifier>(train_members(data, cfg, seed));
  if (name == "Stacking") {
    auto members = train_members(data, cfg, seed);
    Matrix p(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(members.size()));
    for (Eigen::Index r = 0; r < p.rows(); ++r)
      for (std::size_t m = 0; m < members.size(); ++m)
        p(r, static_cast<Eigen::Index>(m)) = members[m]->predict_proba(row_span(data.x, r));
    auto mcfg = cfg.ensemble.meta;
    mcfg.seed = derive_seed(seed, 2);
    auto meta = metanet::train_meta(p, data.y, mcfg);
    return std::make_unique<StackingClassifier>(std::move(members), std::move(meta));
  }

  const auto prep = pipeline::prepare_training(data, cfg.ensemble, seed);
  if (name == "KNN") return std::make_unique<KnnClassifier>(prep.standardizer, prep.x, prep.y, cfg.knn_neighbors);
  if (name == "LR") return fit_logistic(prep, cfg);
  if (name == "SVM") return fit_svm(prep, cfg);
  if (name == "DT")
    return std::make_unique<TreeEnsembleClassifier>(
        prep.standardizer, fit_cart(prep.x, prep.y, 1, cfg.tree_depth, false, 0, derive_seed(seed, 3)));
  if (name == "RF") {
    const auto mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(prep.x.cols()))));
    return std::make_unique<TreeEnsembleClassifier>(
        prep.standardizer, fit_cart(prep.x, prep.y, cfg.forest_trees, cfg.forest_depth, true, mtry, derive_seed(seed, 3)));
  }
  if (name == "NN") {
    auto mcfg = cfg.ensemble.meta;
    mcfg.seed = derive_seed(seed, 2);
    return std::make_unique<NetClassifier>(prep.standardizer, metanet::train_meta(prep.x, prep.y, mcfg));
  }
  // Bagging: bootstrap-resampled boosted models over all features, averaged.
  Rng rng(derive_seed(seed, 4));
  std::vector<boosting::BoostedModel> models;
  const auto n = prep.y.size();
  while (models.size() < static_cast<std::size_t>(cfg.bagging_models)) {
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    const auto yb = take(prep.y, rows);
    const auto p = static_cast<std::size_t>(std::count(yb.begin(), yb.end(), 1));
    if (p == 0 || p == n) continue;  // redraw single-class bootstrap samples
    models.push_back(boosting::fit_boosted(take_rows(prep.x, rows), yb, cfg.ensemble.boost));
  }
  return std::make_unique<BaggedBoostClassifier>(prep.standardizer, std::move(models));
}

}  // namespace oapel::baselines
