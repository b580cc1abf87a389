#include "oapel/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "oapel/error.hpp"
#include "oapel/random.hpp"

namespace oapel::pipeline {

namespace {

// Independent randomness streams derived from the master seed.
enum Stream : std::uint64_t {
  kResampleStream = 1,
  kMetaStream = 2,
  kBagStream = 3,
  kSpectralStream = 4,
  kMetaResampleStream = 6,
  kStackFoldStream = 100,
  kBaseStream = 1000,
};

std::size_t count_positive(const Labels& y) {
  return static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
}

bool both_classes(const Labels& y) {
  const auto p = count_positive(y);
  return p > 0 && p < y.size();
}

Matrix stack_in_fold(const std::vector<boosting::BoostedModel>& base, const FeatureSubsets& subsets, const Matrix& x) {
  Matrix p(x.rows(), static_cast<Eigen::Index>(base.size()));
  for (std::size_t i = 0; i < base.size(); ++i) {
    const Matrix cols = take_cols(x, subsets[i]);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      p(r, static_cast<Eigen::Index>(i)) = boosting::predict_proba(base[i], row_span(cols, r));
  }
  return p;
}

// SMOTE-ENN with fallbacks for tiny or degenerate training sets.
void resample_guarded(Matrix& x, Labels& y, resampling::ResampleConfig rcfg, std::uint64_t seed) {
  const auto pos = count_positive(y);
  const auto minority = std::min(pos, y.size() - pos);
  if (minority < 2) return;  // too few to interpolate between

  rcfg.seed = seed;
  auto over = resampling::smote(x, y, rcfg);
  if (over.y.size() <= static_cast<std::size_t>(rcfg.enn_neighbors)) {
    x = std::move(over.x);
    y = std::move(over.y);
    return;
  }
  auto cleaned = resampling::enn(over.x, over.y, rcfg);
  // ENN can wipe out a class on tiny folds; keep the oversampled set then.
  const auto cpos = count_positive(cleaned.y);
  if (cpos < 2 || cleaned.y.size() - cpos < 2) {
    x = std::move(over.x);
    y = std::move(over.y);
  } else {
    x = std::move(cleaned.x);
    y = std::move(cleaned.y);
  }
}

// Fold index per row: classes are shuffled separately and dealt round-robin
// so every fold keeps the class ratio.
std::vector<std::size_t> stratified_folds(const Labels& y, std::size_t folds, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> fold(y.size());
  std::size_t next = 0;
  for (int cls : {1, 0}) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < y.size(); ++r)
      if (y[r] == cls) rows.push_back(r);
    rng.shuffle(rows.begin(), rows.end());
    for (auto r : rows) fold[r] = next++ % folds;
  }
  return fold;
}

}  // namespace

StackingMode parse_stacking_mode(const std::string& name) {
  if (name == "in_fold") return StackingMode::kInFold;
  if (name == "out_of_fold") return StackingMode::kOutOfFold;
  throw UsageError("unknown stacking mode '" + name + "' (expected in_fold|out_of_fold)");
}

std::string to_string(StackingMode mode) { return mode == StackingMode::kInFold ? "in_fold" : "out_of_fold"; }

void EnsembleConfig::validate() const {
  boost.validate();
  meta.validate();
  resample.validate();
  if (stacking_folds < 2 || stacking_folds > 100) throw UsageError("stacking_folds must be in [2, 100]");
}

nlohmann::json to_json(const EnsembleConfig& cfg) {
  auto meta = metanet::to_json(cfg.meta);
  meta.erase("seed");
  auto resample = resampling::to_json(cfg.resample);
  resample.erase("seed");
  resample["enabled"] = cfg.resample_enabled;
  return {{"boost", boosting::to_json(cfg.boost)},
          {"meta", std::move(meta)},
          {"resample", std::move(resample)},
          {"stacking", to_string(cfg.stacking)},
          {"stacking_folds", cfg.stacking_folds},
          {"laplacian", spectral::to_string(cfg.laplacian)},
          {"ab_subset_size", cfg.ab_subset_size}};
}

EnsembleConfig ensemble_config_from_json(const nlohmann::json& j) {
  EnsembleConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "boost") {
        cfg.boost = boosting::boost_params_from_json(value);
      } else if (key == "meta") {
        cfg.meta = metanet::meta_config_from_json(value);
      } else if (key == "resample") {
        auto r = value;
        if (r.contains("enabled")) {
          cfg.resample_enabled = r.at("enabled").get<bool>();
          r.erase("enabled");
        }
        cfg.resample = resampling::resample_config_from_json(r);
      } else if (key == "stacking") {
        cfg.stacking = parse_stacking_mode(value.get<std::string>());
      } else if (key == "stacking_folds") {
        cfg.stacking_folds = value.get<int>();
      } else if (key == "laplacian") {
        cfg.laplacian = spectral::parse_laplacian_kind(value.get<std::string>());
      } else if (key == "ab_subset_size") {
        cfg.ab_subset_size = value.get<std::size_t>();
      } else {
        throw UsageError("model config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("model config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

EnsembleConfig with_hyper(EnsembleConfig cfg, const HyperParams& hp) {
  cfg.meta.l2 = hp.meta_l2;
  cfg.boost.max_depth = hp.max_depth;
  return cfg;
}

Prepared prepare_training(const Dataset& data, const EnsembleConfig& cfg, std::uint64_t seed) {
  Prepared out;
  out.standardizer = Standardizer::fit(data.x);
  out.x = out.standardizer.apply(data.x);
  out.y = data.y;
  if (cfg.resample_enabled) resample_guarded(out.x, out.y, cfg.resample, derive_seed(seed, kResampleStream));
  return out;
}

EnsembleModel train_with_subsets(const Dataset& data, FeatureSubsets subsets, std::string source,
                                 const EnsembleConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  data.validate();
  if (!both_classes(data.y)) throw DataError("training data contains a single class");
  if (subsets.empty()) throw DataError("no feature subsets");
  for (const auto& s : subsets) {
    if (s.empty()) throw DataError("empty feature subset");
    for (auto c : s)
      if (c >= data.features()) throw DataError("feature subset references column " + std::to_string(c));
  }

  EnsembleModel model;
  model.feature_ids = data.feature_ids;
  model.partition_source = std::move(source);
  model.subsets = std::move(subsets);
  model.config = cfg;
  model.seed = seed;

  auto prep = prepare_training(data, cfg, seed);
  model.standardizer = prep.standardizer;

  const auto k = model.subsets.size();
  auto fit_all = [&](const Matrix& x, const Labels& y) {
    std::vector<boosting::BoostedModel> base;
    base.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
      base.push_back(boosting::fit_boosted(take_cols(x, model.subsets[i]), y, cfg.boost, derive_seed(seed, kBaseStream + i)));
    return base;
  };
  model.base = fit_all(prep.x, prep.y);

  Matrix stacked;
  Labels meta_y;
  if (cfg.stacking == StackingMode::kInFold) {
    stacked = stack_in_fold(model.base, model.subsets, prep.x);
    meta_y = prep.y;
  } else {
    // Folds are cut over the original rows before any resampling, so no
    // synthetic sample shares parents across the fold boundary.
    const auto n = data.size();
    const auto folds = static_cast<std::size_t>(cfg.stacking_folds);
    const auto fold = stratified_folds(data.y, folds, derive_seed(seed, kStackFoldStream));
    stacked.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> train_rows, held;
      for (std::size_t r = 0; r < n; ++r) (fold[r] == f ? held : train_rows).push_back(r);
      if (held.empty()) continue;
      const auto part = data.subset(train_rows);
      Matrix p;
      if (part.size() >= 2 && both_classes(part.y)) {
        const auto inner = prepare_training(part, cfg, derive_seed(seed, kStackFoldStream + 1 + f));
        p = stack_in_fold(fit_all(inner.x, inner.y), model.subsets, inner.standardizer.apply(take_rows(data.x, held)));
      } else {
        p = stack_in_fold(model.base, model.subsets, prep.standardizer.apply(take_rows(data.x, held)));
      }
      for (std::size_t t = 0; t < held.size(); ++t) stacked.row(static_cast<Eigen::Index>(held[t])) = p.row(static_cast<Eigen::Index>(t));
    }
    meta_y = data.y;
    if (cfg.resample_enabled) resample_guarded(stacked, meta_y, cfg.resample, derive_seed(seed, kMetaResampleStream));
  }

  auto mcfg = cfg.meta;
  mcfg.seed = derive_seed(seed, kMetaStream);
  model.meta = metanet::train_meta(stacked, meta_y, mcfg);
  return model;
}

std::uint64_t spectral_seed(std::uint64_t seed) { return derive_seed(seed, kSpectralStream); }

EnsembleModel train_oap_el(const Dataset& data, const ontology::OntologyGraph& graph, std::size_t k,
                           const EnsembleConfig& cfg, std::uint64_t seed) {
  check_feature_ids(graph.ids(), data.feature_ids);
  const auto partition = spectral::spectral_partition(graph, k, spectral_seed(seed), cfg.laplacian);
  return train_with_subsets(data, partition.subsets(), "ontology", cfg, seed);
}

FeatureSubsets draw_attribute_bags(std::size_t d, std::size_t k, std::size_t subset_size, std::uint64_t seed) {
  if (k < 1) throw UsageError("attribute bagging: k must be >= 1");
  if (subset_size == 0) subset_size = (d + k - 1) / k;
  if (subset_size > d) throw UsageError("attribute bagging: subset size exceeds feature count");
  Rng rng(seed);
  FeatureSubsets bags(k);
  std::vector<std::size_t> pool(d);
  for (auto& bag : bags) {
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t t = 0; t < subset_size; ++t) std::swap(pool[t], pool[t + rng.below(d - t)]);
    bag.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(subset_size));
    std::sort(bag.begin(), bag.end());
  }
  return bags;
}

EnsembleModel train_ab_el(const Dataset& data, std::size_t k, std::size_t subset_size, const EnsembleConfig& cfg,
                          std::uint64_t seed) {
  auto bags = draw_attribute_bags(data.features(), k, subset_size, derive_seed(seed, kBagStream));
  return train_with_subsets(data, std::move(bags), "attribute_bagging", cfg, seed);
}

std::vector<double> base_probabilities(const EnsembleModel& model, std::span<const double> x) {
  if (x.size() != model.feature_ids.size())
    throw DataError("ensemble: expected " + std::to_string(model.feature_ids.size()) + " features, got " +
                    std::to_string(x.size()));
  const auto z = model.standardizer.apply(x);
  std::vector<double> p(model.k());
  std::vector<double> cols;
  for (std::size_t i = 0; i < model.k(); ++i) {
    cols.clear();
    for (auto c : model.subsets[i]) cols.push_back(z[c]);
    p[i] = boosting::predict_proba(model.base[i], cols);
  }
  return p;
}

double predict(const EnsembleModel& model, std::span<const double> x) {
  return metanet::forward(model.meta, base_probabilities(model, x));
}

std::vector<double> predict_batch(const EnsembleModel& model, const Matrix& x) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) out.push_back(predict(model, row_span(x, r)));
  return out;
}

double EnsembleClassifier::predict_proba(std::span<const double> x) const { return predict(model_, x); }

std::vector<double> EnsembleClassifier::base_probabilities(std::span<const double> x) const {
  return pipeline::base_probabilities(model_, x);
}

std::vector<double> subset_weight_shares(const EnsembleModel& model) {
  const auto k = model.k();
  std::vector<double> w(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) w[i] = model.meta.w1.col(static_cast<Eigen::Index>(i)).cwiseAbs().sum();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v = total > 0.0 ? v / total : 1.0 / static_cast<double>(k);
  return w;
}

std::vector<RankedFeature> rank_features(const EnsembleModel& model) {
  if (model.base.size() != model.k() || model.meta.inputs() != model.k())
    throw UsageError("rank_features: model is not fitted");
  const auto shares = subset_weight_shares(model);
  std::map<std::size_t, double> best;
  for (std::size_t i = 0; i < model.k(); ++i) {
    const auto beta = boosting::gain_importance(model.base[i]);
    const double top = beta.empty() ? 0.0 : *std::max_element(beta.begin(), beta.end());
    for (std::size_t j = 0; j < model.subsets[i].size(); ++j) {
      const double score = top > 0.0 ? shares[i] * (beta[j] / top) : 0.0;
      auto [it, inserted] = best.emplace(model.subsets[i][j], score);
      if (!inserted) it->second = std::max(it->second, score);
    }
  }
  std::vector<RankedFeature> out;
  for (const auto& [col, score] : best) {
    const auto& id = model.feature_ids[col];
    const auto bar = id.find('|');
    RankedFeature f{id, bar == std::string::npos ? "" : id.substr(0, bar),
                    bar == std::string::npos ? "" : id.substr(bar + 1), score};
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  return out;
}

nlohmann::json to_json(const EnsembleModel& model) {
  nlohmann::json base = nlohmann::json::array();
  for (const auto& b : model.base) base.push_back(boosting::to_json(b));
  return {{"feature_ids", model.feature_ids},
          {"partition_source", model.partition_source},
          {"subsets", model.subsets},
          {"standardizer", to_json(model.standardizer)},
          {"base", std::move(base)},
          {"meta", metanet::to_json(model.meta)},
          {"config", to_json(model.config)},
          {"seed", model.seed}};
}

EnsembleModel ensemble_from_json(const nlohmann::json& j) {
  try {
    EnsembleModel m;
    m.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
    m.partition_source = j.at("partition_source").get<std::string>();
    m.subsets = j.at("subsets").get<FeatureSubsets>();
    m.standardizer = standardizer_from_json(j.at("standardizer"));
    for (const auto& b : j.at("base")) m.base.push_back(boosting::boosted_from_json(b));
    m.meta = metanet::metanet_from_json(j.at("meta"));
    m.config = ensemble_config_from_json(j.at("config"));
    m.seed = j.at("seed").get<std::uint64_t>();
    if (m.base.size() != m.subsets.size() || m.meta.inputs() != m.subsets.size())
      throw DataError("malformed model JSON: base model count does not match subsets");
    for (std::size_t i = 0; i < m.base.size(); ++i)
      if (m.base[i].feature_count != m.subsets[i].size())
        throw DataError("malformed model JSON: base model " + std::to_string(i) + " feature count mismatch");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  }
}

void check_feature_ids(const std::vector<std::string>& expected, const std::vector<std::string>& actual) {
  if (expected == actual) return;
  const std::set<std::string> e(expected.begin(), expected.end()), a(actual.begin(), actual.end());
  std::string missing, extra;
  for (const auto& id : e)
    if (!a.count(id)) missing += " " + id;
  for (const auto& id : a)
    if (!e.count(id)) extra += " " + id;
  std::string msg = "feature id mismatch";
  if (!missing.empty()) msg += "; missing:" + missing;
  if (!extra.empty()) msg += "; unexpected:" + extra;
  if (missing.empty() && extra.empty()) msg += "; same ids in a different column order";
  throw DataError(msg);
}

Dataset align_features(const Dataset& data, const std::vector<std::string>& ids) {
  std::map<std::string, std::size_t> where;
  for (std::size_t c = 0; c < data.feature_ids.size(); ++c) where.emplace(data.feature_ids[c], c);
  std::vector<std::size_t> cols;
  for (const auto& id : ids) {
    const auto it = where.find(id);
    if (it == where.end()) check_feature_ids(ids, data.feature_ids);  // throws with the full listing
    cols.push_back(it->second);
  }
  if (ids.size() != data.feature_ids.size()) check_feature_ids(ids, data.feature_ids);
  Dataset out = data;
  out.x = take_cols(data.x, cols);
  out.feature_ids = ids;
  return out;
}

}  // namespace oapel::pipeline
