#include "oapel/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "oapel/error.hpp"
#include "oapel/random.hpp"

namespace oapel::evaluation {

namespace {

void check_binary(std::span<const double> scores, const Labels& labels) {
  if (scores.empty()) throw DataError("metrics: empty input");
  if (scores.size() != labels.size()) throw DataError("metrics: score and label counts differ");
  for (int v : labels)
    if (v != 0 && v != 1) throw DataError("metrics: labels must be 0/1");
}

std::vector<std::size_t> all_but(std::size_t n, std::size_t held_out) {
  std::vector<std::size_t> rows;
  rows.reserve(n - 1);
  for (std::size_t r = 0; r < n; ++r)
    if (r != held_out) rows.push_back(r);
  return rows;
}

bool has_both_classes(const Labels& y) {
  const auto p = std::count(y.begin(), y.end(), 1);
  return p > 0 && static_cast<std::size_t>(p) < y.size();
}

struct FoldOutput {
  bool evaluated = false;
  double prob = 0.0;
  std::vector<double> base;
  pipeline::HyperParams chosen;
};

LoocvResult collect(const Dataset& data, std::vector<FoldOutput>& folds) {
  LoocvResult r;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    if (!folds[i].evaluated) {
      ++r.skipped;
      continue;
    }
    r.indices.push_back(i);
    r.probs.push_back(folds[i].prob);
    r.labels.push_back(data.y[i]);
    r.base_probs.push_back(std::move(folds[i].base));
    r.chosen.push_back(folds[i].chosen);
  }
  return r;
}

// Pooled AUC of a LOOCV run, or -inf when undefined.
double pooled_auc(const LoocvResult& r) {
  if (r.labels.empty() || !has_both_classes(r.labels)) return -std::numeric_limits<double>::infinity();
  return auc(r.probs, r.labels);
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

nlohmann::json to_json(const EvalMetrics& m) {
  return {{"accuracy", m.accuracy}, {"sensitivity", m.sensitivity}, {"specificity", m.specificity},
          {"auc", m.auc},           {"tp", m.tp},                   {"fp", m.fp},
          {"tn", m.tn},             {"fn", m.fn}};
}

double auc(std::span<const double> scores, const Labels& labels) {
  check_binary(scores, labels);
  const auto n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the average rank keeps every quantity an integer.
  double rank_sum2 = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double twice_avg = static_cast<double>(i + 1 + j + 1);
    for (std::size_t t = i; t <= j; ++t)
      if (labels[order[t]] == 1) rank_sum2 += twice_avg;
    i = j + 1;
  }
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const auto neg = static_cast<double>(n) - pos;
  if (pos == 0 || neg == 0) throw DataError("auc: both classes must be present");
  const double u2 = rank_sum2 - pos * (pos + 1.0);
  return (u2 / 2.0) / (pos * neg);
}

EvalMetrics classify_metrics(std::span<const double> probs, const Labels& labels, double threshold) {
  check_binary(probs, labels);
  EvalMetrics m;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool pred = probs[i] >= threshold;
    if (labels[i] == 1)
      pred ? ++m.tp : ++m.fn;
    else
      pred ? ++m.fp : ++m.tn;
  }
  if (m.tp + m.fn == 0) throw DataError("metrics: no positive samples, sensitivity undefined");
  if (m.tn + m.fp == 0) throw DataError("metrics: no negative samples, specificity undefined");
  const auto d = [](std::size_t v) { return static_cast<double>(v); };
  m.accuracy = d(m.tp + m.tn) / d(m.tp + m.tn + m.fp + m.fn);
  m.sensitivity = d(m.tp) / d(m.tp + m.fn);
  m.specificity = d(m.tn) / d(m.tn + m.fp);
  m.auc = auc(probs, labels);
  return m;
}

std::vector<pipeline::HyperParams> HyperGrid::points() const {
  std::vector<pipeline::HyperParams> out;
  for (double l2 : meta_l2)
    for (int depth : max_depth) out.push_back({l2, depth});
  if (out.empty()) throw UsageError("hyperparameter grid is empty");
  return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

LoocvResult loocv(const Dataset& data, const Trainer& trainer, const pipeline::HyperParams& hp, std::uint64_t seed,
                  int threads) {
  data.validate();
  const auto n = data.size();
  if (n < 3) throw DataError("loocv: need at least 3 samples");
  std::vector<FoldOutput> folds(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto rows = all_but(n, i);
    const auto train = data.subset(rows);
    if (!has_both_classes(train.y)) return;
    const auto model = trainer(train, hp, derive_seed(seed, i));
    const auto x = row_span(data.x, static_cast<Eigen::Index>(i));
    folds[i] = {true, model->predict_proba(x), model->base_probabilities(x), hp};
  });
  return collect(data, folds);
}

LoocvResult nested_loocv(const Dataset& data, const Trainer& trainer, const HyperGrid& grid, std::uint64_t seed,
                         int threads) {
  data.validate();
  const auto n = data.size();
  if (n < 3) throw DataError("nested loocv: need at least 3 samples");
  const auto points = grid.points();
  std::vector<FoldOutput> folds(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto rows = all_but(n, i);
    const auto train = data.subset(rows);
    if (!has_both_classes(train.y)) return;
    const auto fold_seed = derive_seed(seed, i);
    std::size_t best = 0;
    double best_auc = -std::numeric_limits<double>::infinity();
    if (points.size() > 1) {
      for (std::size_t g = 0; g < points.size(); ++g) {
        double inner = -std::numeric_limits<double>::infinity();
        if (train.size() >= 3) inner = pooled_auc(loocv(train, trainer, points[g], derive_seed(fold_seed, 1 + g), 1));
        if (inner > best_auc) {
          best_auc = inner;
          best = g;
        }
      }
    }
    const auto model = trainer(train, points[best], fold_seed);
    const auto x = row_span(data.x, static_cast<Eigen::Index>(i));
    folds[i] = {true, model->predict_proba(x), model->base_probabilities(x), points[best]};
  });
  return collect(data, folds);
}

double kappa_from_table(double a, double b, double c, double d) {
  const double den = (a + b) * (c + d) + (a + c) * (b + d);
  if (den == 0.0) throw NumericalError("kappa undefined: both classifiers constant and identical in correctness");
  return 2.0 * (a * d - b * c) / den;
}

KappaErrorPoint kappa_pair(const Labels& pa, const Labels& pb, const Labels& labels) {
  if (pa.size() != labels.size() || pb.size() != labels.size()) throw DataError("kappa: prediction lengths differ");
  if (labels.empty()) throw DataError("kappa: empty input");
  std::size_t na = 0, nb = 0, nc = 0, nd = 0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const bool ca = pa[t] == labels[t];
    const bool cb = pb[t] == labels[t];
    if (ca && cb)
      ++na;
    else if (ca)
      ++nb;
    else if (cb)
      ++nc;
    else
      ++nd;
  }
  const auto n = static_cast<double>(labels.size());
  const double a = static_cast<double>(na) / n, b = static_cast<double>(nb) / n;
  const double c = static_cast<double>(nc) / n, d = static_cast<double>(nd) / n;
  KappaErrorPoint p;
  p.kappa = kappa_from_table(a, b, c, d);
  p.mean_error = ((b + d) + (c + d)) / 2.0;
  return p;
}

std::vector<KappaErrorPoint> kappa_error_cloud(const std::vector<Labels>& preds, const Labels& labels) {
  if (preds.size() < 2) throw DataError("kappa cloud: need at least 2 classifiers");
  std::vector<KappaErrorPoint> cloud;
  for (std::size_t i = 0; i < preds.size(); ++i)
    for (std::size_t j = i + 1; j < preds.size(); ++j) {
      auto p = kappa_pair(preds[i], preds[j], labels);
      p.i = i;
      p.j = j;
      cloud.push_back(p);
    }
  return cloud;
}

std::vector<Labels> base_predictions(const LoocvResult& r, double threshold) {
  if (r.base_probs.empty()) return {};
  const auto k = r.base_probs.front().size();
  std::vector<Labels> out(k, Labels(r.base_probs.size()));
  for (std::size_t s = 0; s < r.base_probs.size(); ++s) {
    if (r.base_probs[s].size() != k) throw DataError("kappa: inconsistent base classifier counts");
    for (std::size_t i = 0; i < k; ++i) out[i][s] = r.base_probs[s][i] >= threshold ? 1 : 0;
  }
  return out;
}

double mean_kappa(const std::vector<KappaErrorPoint>& cloud) {
  if (cloud.empty()) throw DataError("kappa cloud is empty");
  double s = 0.0;
  for (const auto& p : cloud) s += p.kappa;
  return s / static_cast<double>(cloud.size());
}

std::string kappa_cloud_csv(const std::vector<KappaErrorPoint>& cloud) {
  std::ostringstream out;
  out << "pair_i,pair_j,kappa,mean_error\n";
  for (const auto& p : cloud) out << p.i << ',' << p.j << ',' << format_double(p.kappa) << ',' << format_double(p.mean_error) << '\n';
  return out.str();
}

MetricSummary summarize(const std::vector<EvalMetrics>& per) {
  if (per.empty()) throw DataError("summary of zero replications");
  std::vector<double> acc, sens, spec, a;
  for (const auto& m : per) {
    acc.push_back(m.accuracy);
    sens.push_back(m.sensitivity);
    spec.push_back(m.specificity);
    a.push_back(m.auc);
  }
  return {{mean_of(acc), mean_of(sens), mean_of(spec), mean_of(a)},
          {sample_sd(acc), sample_sd(sens), sample_sd(spec), sample_sd(a)}};
}

ExperimentReport run_replications(const std::string& model_name, const Dataset& data, const Trainer& trainer,
                                  const ReplicationOptions& opts, std::uint64_t master_seed) {
  if (opts.replications < 1) throw UsageError("replications must be >= 1");
  ExperimentReport report;
  report.model = model_name;
  std::vector<EvalMetrics> per;
  std::vector<double> all_probs;
  Labels all_labels;
  for (std::size_t r = 0; r < opts.replications; ++r) {
    Replication rep;
    rep.seed = derive_seed(master_seed, r);
    const auto res = opts.nested ? nested_loocv(data, trainer, opts.grid, rep.seed, opts.threads)
                                 : loocv(data, trainer, opts.fixed, rep.seed, opts.threads);
    rep.metrics = classify_metrics(res.probs, res.labels, opts.threshold);
    rep.skipped = res.skipped;
    const auto preds = base_predictions(res, opts.threshold);
    if (preds.size() >= 2) rep.mean_kappa = mean_kappa(kappa_error_cloud(preds, res.labels));
    rep.probs = res.probs;
    all_probs.insert(all_probs.end(), res.probs.begin(), res.probs.end());
    all_labels.insert(all_labels.end(), res.labels.begin(), res.labels.end());
    per.push_back(rep.metrics);
    report.replications.push_back(std::move(rep));
  }
  report.summary = summarize(per);
  report.pooled = classify_metrics(all_probs, all_labels, opts.threshold);
  return report;
}

nlohmann::json to_json(const ExperimentReport& r) {
  const auto rates = [](const Rates& x) {
    return nlohmann::json{{"accuracy", x.accuracy}, {"sensitivity", x.sensitivity}, {"specificity", x.specificity}, {"auc", x.auc}};
  };
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& rep : r.replications) {
    nlohmann::json j{{"seed", rep.seed}, {"metrics", to_json(rep.metrics)}, {"skipped_folds", rep.skipped}};
    if (rep.mean_kappa) j["mean_kappa"] = *rep.mean_kappa;
    reps.push_back(std::move(j));
  }
  return {{"model", r.model},
          {"replications", std::move(reps)},
          {"mean", rates(r.summary.mean)},
          {"sd", rates(r.summary.sd)},
          {"pooled", to_json(r.pooled)},
          {"config", r.config}};
}

SweepResult sweep_k(const std::vector<std::size_t>& ks, const std::function<std::vector<double>(std::size_t)>& evaluate) {
  if (ks.empty()) throw UsageError("k range is empty");
  SweepResult s;
  double best = -std::numeric_limits<double>::infinity();
  for (auto k : ks) {
    const auto aucs = evaluate(k);
    if (aucs.empty()) throw DataError("sweep: no AUC values for k=" + std::to_string(k));
    const double m = mean_of(aucs);
    s.ks.push_back(k);
    s.mean_auc.push_back(m);
    s.sd_auc.push_back(sample_sd(aucs));
    if (m > best) {
      best = m;
      s.best_k = k;
    }
  }
  return s;
}

SweepResult sweep_k(const Dataset& data, const ontology::OntologyGraph& graph, const std::vector<std::size_t>& ks,
                    std::size_t reps, const pipeline::EnsembleConfig& cfg, const pipeline::HyperParams& hp,
                    std::uint64_t seed, int threads) {
  if (reps < 1) throw UsageError("replications must be >= 1");
  baselines::BaselineConfig bc;
  bc.ensemble = cfg;
  return sweep_k(ks, [&](std::size_t k) {
    const auto trainer = make_trainer("OAP-EL", bc, &graph, k);
    std::vector<double> aucs;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto res = loocv(data, trainer, hp, derive_seed(seed, r), threads);
      aucs.push_back(auc(res.probs, res.labels));
    }
    return aucs;
  });
}

std::vector<std::string> model_names() {
  std::vector<std::string> names = {"OAP-EL", "AB-EL"};
  for (const auto& b : baselines::baseline_names()) names.push_back(b);
  return names;
}

Trainer make_trainer(const std::string& name, const baselines::BaselineConfig& cfg, const ontology::OntologyGraph* graph,
                     std::size_t k, const FeatureSubsets* forced) {
  cfg.validate();
  if (name == "OAP-EL" || name == "AB-EL") {
    if (forced) {
      return [cfg, subsets = *forced](const Dataset& train, const pipeline::HyperParams& hp, std::uint64_t seed) {
        return std::make_unique<pipeline::EnsembleClassifier>(
            pipeline::train_with_subsets(train, subsets, "forced", pipeline::with_hyper(cfg.ensemble, hp), seed));
      };
    }
    if (k < 1) throw UsageError("k must be >= 1");
    if (name == "AB-EL") {
      return [cfg, k](const Dataset& train, const pipeline::HyperParams& hp, std::uint64_t seed) {
        return std::make_unique<pipeline::EnsembleClassifier>(pipeline::train_ab_el(
            train, k, cfg.ensemble.ab_subset_size, pipeline::with_hyper(cfg.ensemble, hp), seed));
      };
    }
    if (!graph) throw UsageError("OAP-EL needs an ontology graph");
    return [cfg, g = *graph, k](const Dataset& train, const pipeline::HyperParams& hp, std::uint64_t seed) {
      return std::make_unique<pipeline::EnsembleClassifier>(
          pipeline::train_oap_el(train, g, k, pipeline::with_hyper(cfg.ensemble, hp), seed));
    };
  }
  const auto& names = baselines::baseline_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) throw UsageError("unknown model '" + name + "'");
  return [cfg, name](const Dataset& train, const pipeline::HyperParams& hp, std::uint64_t seed) {
    auto c = cfg;
    c.ensemble = pipeline::with_hyper(cfg.ensemble, hp);
    return baselines::train_baseline(name, train, c, seed);
  };
}

}  // namespace oapel::evaluation
