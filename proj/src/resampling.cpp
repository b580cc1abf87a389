#include "oapel/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oapel/error.hpp"
#include "oapel/random.hpp"

namespace oapel::resampling {

namespace {

void check(const Matrix& x, const Labels& y) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw DataError("resampling: " + std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) + " labels");
  for (int v : y)
    if (v != 0 && v != 1) throw DataError("resampling: labels must be 0/1");
}

}  // namespace

void ResampleConfig::validate() const {
  if (smote_neighbors < 1) throw UsageError("resample: smote_neighbors must be >= 1");
  if (enn_neighbors < 1) throw UsageError("resample: enn_neighbors must be >= 1");
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) throw UsageError("resample: target_ratio must be in (0, 1]");
}

std::vector<std::size_t> nearest_neighbors(const Matrix& x, std::size_t i, const std::vector<std::size_t>& candidates,
                                           std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(candidates.size());
  const auto xi = x.row(static_cast<Eigen::Index>(i));
  for (auto c : candidates) {
    if (c == i) continue;
    dist.emplace_back((x.row(static_cast<Eigen::Index>(c)) - xi).squaredNorm(), c);
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t t = 0; t < k; ++t) out[t] = dist[t].second;
  return out;
}

Resampled smote(const Matrix& x, const Labels& y, const ResampleConfig& cfg) {
  cfg.validate();
  check(x, y);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);

  Resampled out{x, y, {}, {}, 0.0};
  if (pos.size() == neg.size()) {
    out.post_smote_ratio = 1.0;
    return out;
  }
  const bool pos_minor = pos.size() < neg.size();
  const auto& minority = pos_minor ? pos : neg;
  const auto majority_count = (pos_minor ? neg : pos).size();
  const int minority_label = pos_minor ? 1 : 0;
  if (minority.size() < 2)
    throw DataError("smote: minority class has " + std::to_string(minority.size()) + " sample(s), need at least 2");

  const auto wanted = static_cast<std::size_t>(std::ceil(cfg.target_ratio * static_cast<double>(majority_count)));
  const std::size_t needed = wanted > minority.size() ? wanted - minority.size() : 0;
  if (needed > 0) {
    std::vector<std::vector<std::size_t>> nn(minority.size());
    for (std::size_t m = 0; m < minority.size(); ++m)
      nn[m] = nearest_neighbors(x, minority[m], minority, static_cast<std::size_t>(cfg.smote_neighbors));

    Rng rng(cfg.seed);
    const auto n = x.rows();
    out.x.conservativeResize(n + static_cast<Eigen::Index>(needed), Eigen::NoChange);
    out.y.resize(y.size() + needed, minority_label);
    for (std::size_t s = 0; s < needed; ++s) {
      const auto m = s % minority.size();
      const auto parent = minority[m];
      const auto neighbor = nn[m][rng.below(nn[m].size())];
      const double u = rng.uniform();
      const auto row = n + static_cast<Eigen::Index>(s);
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double a = x(static_cast<Eigen::Index>(parent), j);
        const double b = x(static_cast<Eigen::Index>(neighbor), j);
        out.x(row, j) = a + u * (b - a);
      }
      out.synthetic.push_back({parent, neighbor, u});
    }
  }
  out.post_smote_ratio = static_cast<double>(minority.size() + needed) / static_cast<double>(majority_count);
  return out;
}

Resampled enn(const Matrix& x, const Labels& y, const ResampleConfig& cfg) {
  cfg.validate();
  check(x, y);
  const auto n = y.size();
  const auto k = static_cast<std::size_t>(cfg.enn_neighbors);
  if (n <= k) throw DataError("enn: " + std::to_string(n) + " samples, need more than " + std::to_string(k));

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  Resampled out;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t positive = 0;
    for (auto j : nearest_neighbors(x, i, all, k)) positive += static_cast<std::size_t>(y[j]);
    const std::size_t negative = k - positive;
    const bool remove = (positive > negative && y[i] == 0) || (negative > positive && y[i] == 1);
    if (!remove) out.kept.push_back(i);
  }
  out.x = take_rows(x, out.kept);
  out.y = take(y, out.kept);
  return out;
}

Resampled smote_enn(const Matrix& x, const Labels& y, const ResampleConfig& cfg) {
  auto over = smote(x, y, cfg);
  auto cleaned = enn(over.x, over.y, cfg);
  cleaned.synthetic = std::move(over.synthetic);
  cleaned.post_smote_ratio = over.post_smote_ratio;
  return cleaned;
}

nlohmann::json to_json(const ResampleConfig& cfg) {
  return {{"smote_neighbors", cfg.smote_neighbors},
          {"enn_neighbors", cfg.enn_neighbors},
          {"target_ratio", cfg.target_ratio},
          {"seed", cfg.seed}};
}

ResampleConfig resample_config_from_json(const nlohmann::json& j) {
  ResampleConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "smote_neighbors")
      cfg.smote_neighbors = value.get<int>();
    else if (key == "enn_neighbors")
      cfg.enn_neighbors = value.get<int>();
    else if (key == "target_ratio")
      cfg.target_ratio = value.get<double>();
    else if (key == "seed")
      cfg.seed = value.get<std::uint64_t>();
    else
      throw UsageError("resample: unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace oapel::resampling
