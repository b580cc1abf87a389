#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace oapel::ontology {

/// The six per-region geometric / maturation measures.
enum class MetricType : std::uint8_t {
  kVolume,
  kThickness,
  kSulcalDepth,
  kCurvature,
  kGyrificationIndex,
  kSurfaceArea,
};

inline constexpr std::array<MetricType, 6> kAllMetrics = {
    MetricType::kVolume,    MetricType::kThickness,         MetricType::kSulcalDepth,
    MetricType::kCurvature, MetricType::kGyrificationIndex, MetricType::kSurfaceArea,
};

/// Canonical token, e.g. "sulcal_depth".
std::string_view to_token(MetricType m);
/// Throws DataError for anything but the six canonical tokens.
MetricType parse_metric(std::string_view token);

struct FeatureDescriptor {
  std::string id;  // region + "|" + metric token
  std::string region;
  MetricType metric;

  static FeatureDescriptor make(std::string region, MetricType metric);
  bool operator==(const FeatureDescriptor&) const = default;
};

/// A flat taxonomy: declared classes plus (child, parent) subclass edges.
struct Ontology {
  std::string name;
  std::set<std::string> classes;
  std::set<std::pair<std::string, std::string>> subclass_edges;

  bool has_class(const std::string& label) const { return classes.count(label) != 0; }
  bool operator==(const Ontology&) const = default;
};

/// Parses the functional-style subset:
///
///   # comment
///   Ontology(name)            (optional, at most once)
///   Class(label)
///   SubClassOf(child parent)
///
/// Statements are separated by whitespace; several may share a line.
/// Throws DataError (with the 1-based line number) on syntax errors, duplicate
/// classes, edges over undeclared classes and subclass cycles.
Ontology parse_ontology(std::string_view text);

/// Inverse of parse_ontology on the declared content.
std::string serialize_ontology(const Ontology& onto);

Ontology load_ontology(const std::string& path);

/// Binds "region|metric" identifiers to descriptors, validating each region
/// against the parcellation ontology. Order is preserved.
std::vector<FeatureDescriptor> resolve_features(const Ontology& parcellation,
                                                const std::vector<std::string>& feature_ids);

/// Every metric used by `features` must be declared as a class of the
/// maturation/geometry ontology.
void check_metrics_declared(const Ontology& metrics, const std::vector<FeatureDescriptor>& features);

/// Undirected unweighted graph over features. Two distinct features are
/// adjacent iff they share a region or share a metric type.
class OntologyGraph {
 public:
  OntologyGraph() = default;
  OntologyGraph(std::vector<FeatureDescriptor> vertices, std::vector<std::uint8_t> adjacency);

  std::size_t size() const { return vertices_.size(); }
  const std::vector<FeatureDescriptor>& vertices() const { return vertices_; }
  bool adjacent(std::size_t i, std::size_t j) const { return adjacency_[i * size() + j] != 0; }
  std::size_t degree(std::size_t i) const;
  std::size_t edge_count() const;
  std::vector<std::string> ids() const;

 private:
  std::vector<FeatureDescriptor> vertices_;
  std::vector<std::uint8_t> adjacency_;  // n*n, symmetric, zero diagonal
};

OntologyGraph build_graph(const std::vector<FeatureDescriptor>& features);

/// {"vertices": [ids], "edges": [[i, j], ...]} with i < j.
nlohmann::json graph_to_json(const OntologyGraph& g);

}  // namespace oapel::ontology
