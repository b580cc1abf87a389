#include "oapel/synthdata.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "oapel/error.hpp"
#include "oapel/random.hpp"

namespace oapel::synthdata {

std::vector<std::pair<std::size_t, std::size_t>> SynthSpec::metric_cells(std::size_t regions, std::size_t metric) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t r = 0; r < regions; ++r) cells.emplace_back(r, metric);
  return cells;
}

void SynthSpec::validate() const {
  if (regions < 1) throw UsageError("synth: regions must be >= 1");
  if (metrics < 1 || metrics > ontology::kAllMetrics.size()) throw UsageError("synth: metrics must be in [1, 6]");
  if (subjects < 2) throw UsageError("synth: subjects must be >= 2");
  if (!(rho >= 0.0 && rho < 1.0)) throw UsageError("synth: rho must be in [0, 1)");
  if (!(prevalence > 0.0 && prevalence < 1.0)) throw UsageError("synth: prevalence must be in (0, 1)");
  if (!std::isfinite(effect)) throw UsageError("synth: effect must be finite");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& c : informative) {
    if (c.first >= regions || c.second >= metrics) throw UsageError("synth: informative cell outside the grid");
    if (!seen.insert(c).second) throw UsageError("synth: duplicate informative cell");
  }
}

nlohmann::json to_json(const SynthSpec& s) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : s.informative) cells.push_back({c.first, c.second});
  return {{"regions", s.regions}, {"metrics", s.metrics},       {"subjects", s.subjects}, {"informative", cells},
          {"effect", s.effect},   {"prevalence", s.prevalence}, {"rho", s.rho},           {"seed", s.seed}};
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "regions")
        s.regions = value.get<std::size_t>();
      else if (key == "metrics")
        s.metrics = value.get<std::size_t>();
      else if (key == "subjects")
        s.subjects = value.get<std::size_t>();
      else if (key == "informative")
        s.informative = value.get<std::vector<std::pair<std::size_t, std::size_t>>>();
      else if (key == "effect")
        s.effect = value.get<double>();
      else if (key == "prevalence")
        s.prevalence = value.get<double>();
      else if (key == "rho")
        s.rho = value.get<double>();
      else if (key == "seed")
        s.seed = value.get<std::uint64_t>();
      else
        throw UsageError("synth: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("synth: ") + e.what());
  }
  s.validate();
  return s;
}

std::string region_label(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "region%02zu", r + 1);
  return buf;
}

SynthOutput generate(const SynthSpec& spec) {
  spec.validate();
  SynthOutput out;
  out.parcellation.name = "parcellation";
  out.parcellation.classes.insert("Region");
  for (std::size_t r = 0; r < spec.regions; ++r) {
    out.parcellation.classes.insert(region_label(r));
    out.parcellation.subclass_edges.emplace(region_label(r), "Region");
  }
  out.metrics.name = "maturation";
  out.metrics.classes.insert("Metric");
  for (std::size_t m = 0; m < spec.metrics; ++m) {
    const std::string tok(ontology::to_token(ontology::kAllMetrics[m]));
    out.metrics.classes.insert(tok);
    out.metrics.subclass_edges.emplace(tok, "Metric");
  }

  // Region-major column order.
  std::vector<ontology::FeatureDescriptor> features;
  std::vector<std::vector<bool>> shifted(spec.regions, std::vector<bool>(spec.metrics, false));
  for (const auto& c : spec.informative) shifted[c.first][c.second] = true;
  for (std::size_t r = 0; r < spec.regions; ++r)
    for (std::size_t m = 0; m < spec.metrics; ++m)
      features.push_back(ontology::FeatureDescriptor::make(region_label(r), ontology::kAllMetrics[m]));
  out.graph = ontology::build_graph(features);

  auto& d = out.data;
  const auto n = spec.subjects;
  const auto cols = spec.regions * spec.metrics;
  for (const auto& f : features) d.feature_ids.push_back(f.id);
  Rng label_rng(derive_seed(spec.seed, 1));
  for (std::size_t s = 0; s < n; ++s) {
    d.y.push_back(label_rng.uniform() < spec.prevalence ? 1 : 0);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "s%04zu", s + 1);
    d.subject_ids.emplace_back(buf);
  }
  Rng noise_rng(derive_seed(spec.seed, 2));
  const double shared = std::sqrt(spec.rho), own = std::sqrt(1.0 - spec.rho);
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  std::vector<double> z(spec.metrics);
  for (std::size_t s = 0; s < n; ++s) {
    for (auto& v : z) v = noise_rng.normal();
    for (std::size_t r = 0; r < spec.regions; ++r)
      for (std::size_t m = 0; m < spec.metrics; ++m) {
        double v = shared * z[m] + own * noise_rng.normal();
        if (d.y[s] == 1 && shifted[r][m]) v += spec.effect;
        d.x(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(r * spec.metrics + m)) = v;
      }
  }
  d.validate();
  return out;
}

}  // namespace oapel::synthdata
