#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "oapel/dataset.hpp"
#include "oapel/ontology.hpp"

namespace oapel::synthdata {

/// Planted-structure benchmark: a regions x metrics grid of features with
/// noise shared inside each metric group and a mean shift on the informative
/// cells for positive subjects.
struct SynthSpec {
  std::size_t regions = 12;
  std::size_t metrics = 6;
  std::size_t subjects = 120;
  /// (region index, metric index) cells shifted by `effect` in the positive class.
  std::vector<std::pair<std::size_t, std::size_t>> informative = metric_cells(6, 1);
  double effect = 0.7;
  double prevalence = 0.35;
  double rho = 0.8;  // noise correlation between features of the same metric
  std::uint64_t seed = 1;

  /// Cells of the first `regions` regions of metric `metric`.
  static std::vector<std::pair<std::size_t, std::size_t>> metric_cells(std::size_t regions, std::size_t metric);

  void validate() const;
  bool operator==(const SynthSpec&) const = default;
};

nlohmann::json to_json(const SynthSpec& s);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

struct SynthOutput {
  Dataset data;
  ontology::Ontology parcellation;
  ontology::Ontology metrics;
  ontology::OntologyGraph graph;
};

/// "region01", "region02", ...
std::string region_label(std::size_t r);

SynthOutput generate(const SynthSpec& spec);

}  // namespace oapel::synthdata
