#include "oapel/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "oapel/error.hpp"

namespace oapel::boosting {

namespace {

constexpr double kProbFloor = 1e-15;
constexpr double kLossClip = 1e-12;

double gini_mass(double g, double h) { return h > 0.0 ? 2.0 * g * (h - g) / h : 0.0; }

void check_training_data(const Matrix& x, const Labels& y) {
  if (x.rows() == 0 || y.empty()) throw DataError("boosting: empty training data");
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw DataError("boosting: " + std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) + " labels");
  if (x.rows() < 2) throw DataError("boosting: need at least two samples");
  if (!x.allFinite()) throw DataError("boosting: non-finite feature value");
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("boosting: labels must be 0/1");
    pos += static_cast<std::size_t>(v);
  }
  if (pos == 0 || pos == y.size()) throw DataError("boosting: training labels contain a single class");
}

}  // namespace

void BoostParams::validate() const {
  if (rounds < 1) throw UsageError("boost: rounds must be >= 1");
  if (max_depth < 1) throw UsageError("boost: max_depth must be >= 1");
  if (!(leaf_penalty >= 0.0)) throw UsageError("boost: leaf_penalty must be >= 0");
  if (!(split_penalty >= 0.0)) throw UsageError("boost: split_penalty must be >= 0");
  if (!(step_shrinkage > 0.0 && step_shrinkage <= 1.0)) throw UsageError("boost: step_shrinkage must be in (0, 1]");
  if (!(min_child_hessian >= 0.0)) throw UsageError("boost: min_child_hessian must be >= 0");
}

double Tree::evaluate(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

std::size_t Tree::split_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

double logistic(double margin) {
  if (margin >= 0.0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

double leaf_score(double grad_sum, double hess_sum, double leaf_penalty) { return -grad_sum / (hess_sum + leaf_penalty); }

double split_gain(double gl, double hl, double gr, double hr, double leaf_penalty, double split_penalty) {
  const double g = gl + gr;
  const double h = hl + hr;
  return 0.5 * (gl * gl / (hl + leaf_penalty) + gr * gr / (hr + leaf_penalty) - g * g / (h + leaf_penalty)) -
         split_penalty;
}

std::vector<std::vector<std::size_t>> sort_columns(const Matrix& x) {
  std::vector<std::vector<std::size_t>> sorted(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    auto& idx = sorted[static_cast<std::size_t>(j)];
    idx.resize(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return x(static_cast<Eigen::Index>(a), j) < x(static_cast<Eigen::Index>(b), j);
    });
  }
  return sorted;
}

Tree grow_tree(const Matrix& x, const std::vector<std::vector<std::size_t>>& sorted, std::span<const double> grad,
               std::span<const double> hess, const GrowConfig& cfg, Rng* rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  const bool newton = cfg.criterion == SplitCriterion::kNewton;
  const bool sample_features = cfg.features_per_node > 0 && cfg.features_per_node < d;

  struct Stats {
    double g = 0.0, h = 0.0;
  };
  struct Best {
    double gain = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
  };

  Tree tree;
  std::vector<Stats> totals;
  auto leaf_value = [&](const Stats& s) {
    if (newton) return leaf_score(s.g, s.h, cfg.leaf_penalty);
    return s.h > 0.0 ? s.g / s.h : 0.0;
  };

  tree.nodes.emplace_back();
  totals.emplace_back();
  for (std::size_t i = 0; i < n; ++i) {
    totals[0].g += grad[i];
    totals[0].h += hess[i];
  }

  std::vector<int> node_of(n, 0);
  std::vector<int> frontier{0};
  std::vector<int> slot_of(1, 0);

  for (int depth = 0; depth < cfg.max_depth && !frontier.empty(); ++depth) {
    const auto slots = frontier.size();
    slot_of.assign(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < slots; ++s) slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);

    std::vector<char> allowed;
    if (sample_features) {
      allowed.assign(slots * d, 0);
      std::vector<std::size_t> feats(d);
      for (std::size_t s = 0; s < slots; ++s) {
        std::iota(feats.begin(), feats.end(), 0);
        for (std::size_t t = 0; t < cfg.features_per_node; ++t) {
          const auto pick = t + rng->below(d - t);
          std::swap(feats[t], feats[pick]);
          allowed[s * d + feats[t]] = 1;
        }
      }
    }

    std::vector<Best> best(slots);
    std::vector<Stats> left(slots);
    std::vector<double> last(slots);
    std::vector<char> has_last(slots);
    for (std::size_t j = 0; j < d; ++j) {
      std::fill(left.begin(), left.end(), Stats{});
      std::fill(has_last.begin(), has_last.end(), 0);
      for (const auto r : sorted[j]) {
        const int node = node_of[r];
        if (node < 0) continue;
        const int si = slot_of[static_cast<std::size_t>(node)];
        if (si < 0) continue;
        const auto s = static_cast<std::size_t>(si);
        if (sample_features && !allowed[s * d + j]) continue;
        const double v = x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
        if (has_last[s] && v > last[s]) {
          const Stats& tot = totals[static_cast<std::size_t>(node)];
          const Stats& l = left[s];
          const double gr = tot.g - l.g;
          const double hr = tot.h - l.h;
          if (l.h >= cfg.min_child_weight && hr >= cfg.min_child_weight) {
            double gain;
            if (newton)
              gain = split_gain(l.g, l.h, gr, hr, cfg.leaf_penalty, cfg.split_penalty);
            else
              gain = gini_mass(tot.g, tot.h) - gini_mass(l.g, l.h) - gini_mass(gr, hr);
            if (gain > best[s].gain) {
              double thr = 0.5 * (last[s] + v);
              if (!(thr > last[s])) thr = v;
              best[s] = {gain, static_cast<int>(j), thr};
            }
          }
        }
        left[s].g += grad[r];
        left[s].h += hess[r];
        last[s] = v;
        has_last[s] = 1;
      }
    }

    std::vector<int> next_frontier;
    for (std::size_t s = 0; s < slots; ++s) {
      const int node = frontier[s];
      const double min_gain = newton ? 0.0 : 1e-12;
      if (best[s].feature < 0 || !(best[s].gain > min_gain)) continue;  // stays a leaf
      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      totals.emplace_back();
      totals.emplace_back();
      auto& nd = tree.nodes[static_cast<std::size_t>(node)];
      nd.feature = best[s].feature;
      nd.threshold = best[s].threshold;
      nd.gain = best[s].gain;
      nd.left = l;
      nd.right = l + 1;
      next_frontier.push_back(l);
      next_frontier.push_back(l + 1);
    }
    for (std::size_t r = 0; r < n; ++r) {
      const int node = node_of[r];
      if (node < 0) continue;
      const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
      if (nd.is_leaf()) {
        node_of[r] = -1;
        continue;
      }
      const double v = x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(nd.feature));
      const int child = v < nd.threshold ? nd.left : nd.right;
      node_of[r] = child;
      totals[static_cast<std::size_t>(child)].g += grad[r];
      totals[static_cast<std::size_t>(child)].h += hess[r];
    }
    frontier = std::move(next_frontier);
  }

  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    if (tree.nodes[i].is_leaf()) tree.nodes[i].value = leaf_value(totals[i]);
  return tree;
}

double BoostedModel::margin(std::span<const double> x) const {
  double m = base_logit;
  for (const auto& t : trees) m += params.step_shrinkage * t.evaluate(x);
  return m;
}

BoostedModel fit_boosted(const Matrix& x, const Labels& y, const BoostParams& params, std::uint64_t /*seed*/) {
  params.validate();
  check_training_data(x, y);
  const auto n = y.size();

  double prevalence = 0.0;
  for (int v : y) prevalence += v;
  prevalence = std::clamp(prevalence / static_cast<double>(n), kLossClip, 1.0 - kLossClip);

  BoostedModel model;
  model.params = params;
  model.feature_count = static_cast<std::size_t>(x.cols());
  model.base_logit = std::log(prevalence / (1.0 - prevalence));

  const auto sorted = sort_columns(x);
  GrowConfig cfg;
  cfg.criterion = SplitCriterion::kNewton;
  cfg.max_depth = params.max_depth;
  cfg.leaf_penalty = params.leaf_penalty;
  cfg.split_penalty = params.split_penalty;
  cfg.min_child_weight = params.min_child_hessian;

  // The first round starts from the training prevalence itself.
  std::vector<double> margin(n, model.base_logit);
  std::vector<double> prob(n, prevalence);
  std::vector<double> grad(n), hess(n);
  model.trees.reserve(static_cast<std::size_t>(params.rounds));
  for (int round = 0; round < params.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = prob[i] - y[i];
      hess[i] = prob[i] * (1.0 - prob[i]);
    }
    auto tree = grow_tree(x, sorted, grad, hess, cfg);
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += params.step_shrinkage * tree.evaluate(row_span(x, static_cast<Eigen::Index>(i)));
      prob[i] = logistic(margin[i]);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

double predict_proba(const BoostedModel& model, std::span<const double> x) {
  if (x.size() != model.feature_count)
    throw DataError("boosting: expected " + std::to_string(model.feature_count) + " features, got " +
                    std::to_string(x.size()));
  return std::clamp(logistic(model.margin(x)), kProbFloor, 1.0 - kProbFloor);
}

std::vector<double> gain_importance(const BoostedModel& model) {
  std::vector<double> beta(model.feature_count, 0.0);
  for (const auto& t : model.trees)
    for (const auto& nd : t.nodes)
      if (!nd.is_leaf()) beta[static_cast<std::size_t>(nd.feature)] += nd.gain;
  return beta;
}

std::vector<double> loss_trace(const BoostedModel& model, const Matrix& x, const Labels& y) {
  const auto n = y.size();
  std::vector<double> margin(n, model.base_logit);
  auto loss = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::clamp(logistic(margin[i]), kLossClip, 1.0 - kLossClip);
      s -= y[i] ? std::log(p) : std::log(1.0 - p);
    }
    return s / static_cast<double>(n);
  };
  std::vector<double> out{loss()};
  for (const auto& t : model.trees) {
    for (std::size_t i = 0; i < n; ++i)
      margin[i] += model.params.step_shrinkage * t.evaluate(row_span(x, static_cast<Eigen::Index>(i)));
    out.push_back(loss());
  }
  return out;
}

// --- serialization ----------------------------------------------------------

namespace {

nlohmann::json node_to_json(const Tree& t, std::size_t i) {
  const auto& nd = t.nodes[i];
  if (nd.is_leaf()) return {{"leaf", nd.value}};
  return {{"feature", nd.feature},
          {"threshold", nd.threshold},
          {"gain", nd.gain},
          {"left", node_to_json(t, static_cast<std::size_t>(nd.left))},
          {"right", node_to_json(t, static_cast<std::size_t>(nd.right))}};
}

// Rebuilds in the same breadth-first layout grow_tree produces.
Tree tree_from_json(const nlohmann::json& root) {
  Tree t;
  std::vector<const nlohmann::json*> queue{&root};
  t.nodes.emplace_back();
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const auto& j = *queue[i];
    if (j.contains("leaf")) {
      t.nodes[i].value = j.at("leaf").get<double>();
      continue;
    }
    auto& nd = t.nodes[i];
    nd.feature = j.at("feature").get<int>();
    nd.threshold = j.at("threshold").get<double>();
    nd.gain = j.at("gain").get<double>();
    nd.left = static_cast<int>(t.nodes.size());
    nd.right = nd.left + 1;
    t.nodes.emplace_back();
    t.nodes.emplace_back();
    queue.push_back(&j.at("left"));
    queue.push_back(&j.at("right"));
  }
  return t;
}

}  // namespace

nlohmann::json to_json(const BoostParams& p) {
  return {{"rounds", p.rounds},
          {"max_depth", p.max_depth},
          {"leaf_penalty", p.leaf_penalty},
          {"split_penalty", p.split_penalty},
          {"step_shrinkage", p.step_shrinkage},
          {"min_child_hessian", p.min_child_hessian}};
}

BoostParams boost_params_from_json(const nlohmann::json& j) {
  BoostParams p;
  for (const auto& [key, value] : j.items()) {
    if (key == "rounds")
      p.rounds = value.get<int>();
    else if (key == "max_depth")
      p.max_depth = value.get<int>();
    else if (key == "leaf_penalty")
      p.leaf_penalty = value.get<double>();
    else if (key == "split_penalty")
      p.split_penalty = value.get<double>();
    else if (key == "step_shrinkage")
      p.step_shrinkage = value.get<double>();
    else if (key == "min_child_hessian")
      p.min_child_hessian = value.get<double>();
    else
      throw UsageError("boost: unknown key '" + key + "'");
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const BoostedModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model.trees) trees.push_back(node_to_json(t, 0));
  return {{"base_logit", model.base_logit},
          {"feature_count", model.feature_count},
          {"params", to_json(model.params)},
          {"trees", std::move(trees)}};
}

BoostedModel boosted_from_json(const nlohmann::json& j) {
  try {
    BoostedModel m;
    m.base_logit = j.at("base_logit").get<double>();
    m.feature_count = j.at("feature_count").get<std::size_t>();
    m.params = boost_params_from_json(j.at("params"));
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed boosted model JSON: ") + e.what());
  }
}

}  // namespace oapel::boosting
