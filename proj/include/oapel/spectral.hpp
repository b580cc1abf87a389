#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oapel/ontology.hpp"
#include "oapel/types.hpp"

namespace oapel::spectral {

enum class LaplacianKind {
  kUnnormalized,         // L = D - A
  kNormalizedSymmetric,  // I - D^-1/2 A D^-1/2; not used by the default pipeline
};

LaplacianKind parse_laplacian_kind(const std::string& name);
std::string to_string(LaplacianKind kind);

/// Dense graph Laplacian. Throws UsageError on an empty graph.
Matrix laplacian(const ontology::OntologyGraph& graph, LaplacianKind kind = LaplacianKind::kUnnormalized);

/// The k smallest eigenpairs of a symmetric matrix.
struct SpectralEmbedding {
  Matrix vectors;               // n x k, orthonormal columns
  std::vector<double> values;   // ascending
  int sweeps = 0;               // Jacobi sweeps used
};

struct JacobiOptions {
  double tolerance = 1e-10;  // off-diagonal Frobenius norm at convergence
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigensolver. Each returned eigenvector has its first
/// nonzero component positive. Throws UsageError for a non-symmetric input or
/// k outside [1, n]; NumericalError when the sweep cap is reached.
SpectralEmbedding eigen_symmetric(const Matrix& m, std::size_t k, const JacobiOptions& opts = {});

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
};

struct KMeansResult {
  std::vector<std::size_t> labels;
  Matrix centroids;
  double inertia = 0.0;
  /// Inertia after each Lloyd iteration of the winning restart.
  std::vector<double> inertia_trace;
};

/// k-means++ seeding, Lloyd iterations, best of `restarts`. Every cluster is
/// nonempty on return; nearest-centroid ties go to the lowest cluster index.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& opts = {});

/// k disjoint, covering, nonempty vertex subsets.
struct Partition {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;  // vertex -> cluster in [0, k)

  /// Validates the invariants; throws DataError.
  static Partition from_assignment(std::size_t k, std::vector<std::size_t> assignment);

  FeatureSubsets subsets() const;
  bool operator==(const Partition&) const = default;
};

/// Laplacian -> k smallest eigenvectors -> k-means on their rows. Cluster
/// labels are renumbered in order of first appearance.
Partition spectral_partition(const ontology::OntologyGraph& graph, std::size_t k, std::uint64_t seed,
                             LaplacianKind kind = LaplacianKind::kUnnormalized);

/// BFS labeling, components numbered by their lowest vertex.
std::vector<std::size_t> connected_components(const ontology::OntologyGraph& graph);

/// True when the two labelings induce the same set partition.
bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

/// {"k": int, "assignment": {feature_id: cluster}}
nlohmann::json partition_to_json(const Partition& p, const std::vector<std::string>& ids);
Partition partition_from_json(const nlohmann::json& j, const std::vector<std::string>& ids);

}  // namespace oapel::spectral
