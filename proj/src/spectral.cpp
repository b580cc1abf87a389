#include "oapel/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

#include "oapel/error.hpp"
#include "oapel/random.hpp"

namespace oapel::spectral {

LaplacianKind parse_laplacian_kind(const std::string& name) {
  if (name == "unnormalized") return LaplacianKind::kUnnormalized;
  if (name == "normalized") return LaplacianKind::kNormalizedSymmetric;
  throw UsageError("unknown laplacian kind '" + name + "' (expected unnormalized|normalized)");
}

std::string to_string(LaplacianKind kind) {
  return kind == LaplacianKind::kUnnormalized ? "unnormalized" : "normalized";
}

Matrix laplacian(const ontology::OntologyGraph& graph, LaplacianKind kind) {
  const auto n = graph.size();
  if (n == 0) throw UsageError("laplacian of an empty graph");
  const auto ni = static_cast<Eigen::Index>(n);
  Matrix l = Matrix::Zero(ni, ni);
  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) degree[i] = static_cast<double>(graph.degree(i));

  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !graph.adjacent(i, j)) continue;
      const auto c = static_cast<Eigen::Index>(j);
      l(r, c) = kind == LaplacianKind::kUnnormalized ? -1.0 : -1.0 / std::sqrt(degree[i] * degree[j]);
    }
    if (kind == LaplacianKind::kUnnormalized)
      l(r, r) = degree[i];
    else
      l(r, r) = degree[i] > 0.0 ? 1.0 : 0.0;
  }
  return l;
}

namespace {

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
  double s = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
  return std::sqrt(2.0 * s);
}

}  // namespace

SpectralEmbedding eigen_symmetric(const Matrix& m, std::size_t k, const JacobiOptions& opts) {
  const auto n = static_cast<std::size_t>(m.rows());
  if (m.rows() != m.cols()) throw UsageError("eigen_symmetric: matrix is not square");
  if (k < 1 || k > n) throw UsageError("eigen_symmetric: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-10) throw UsageError("eigen_symmetric: matrix is not symmetric");

  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      // symmetrize exactly so the rotations see a symmetric matrix
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      a[i * n + j] = 0.5 * (m(ii, jj) + m(jj, ii));
    }
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  int sweeps = 0;
  while (off_diagonal_norm(a, n) >= opts.tolerance) {
    if (sweeps == opts.max_sweeps)
      throw NumericalError("eigen_symmetric: no convergence after " + std::to_string(opts.max_sweeps) + " sweeps");
    ++sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r * n + p];
          const double arq = a[r * n + q];
          if (arp == 0.0 && arq == 0.0) continue;
          const double np = c * arp - s * arq;
          const double nq = s * arp + c * arq;
          a[r * n + p] = a[p * n + r] = np;
          a[r * n + q] = a[q * n + r] = nq;
        }
        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = a[q * n + p] = 0.0;

        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v[r * n + p];
          const double vrq = v[r * n + q];
          v[r * n + p] = c * vrp - s * vrq;
          v[r * n + q] = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x * n + x] < a[y * n + y]; });

  SpectralEmbedding out;
  out.sweeps = sweeps;
  out.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  out.values.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto src = order[c];
    out.values[c] = a[src * n + src];
    double sign = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (std::abs(v[r * n + src]) > 1e-10) {
        sign = v[r * n + src] > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t r = 0; r < n; ++r)
      out.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = sign * v[r * n + src];
  }
  return out;
}

namespace {

double sq_dist(const Matrix& x, Eigen::Index i, const Matrix& c, Eigen::Index j) {
  return (x.row(i) - c.row(j)).squaredNorm();
}

struct LloydRun {
  std::vector<std::size_t> labels;
  Matrix centroids;
  double inertia;
  std::vector<double> trace;
};

void update_centroids(const Matrix& x, const std::vector<std::size_t>& labels, std::size_t k, Matrix& centroids,
                      std::vector<std::size_t>& counts) {
  centroids.setZero(static_cast<Eigen::Index>(k), x.cols());
  counts.assign(k, 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto l = labels[static_cast<std::size_t>(i)];
    centroids.row(static_cast<Eigen::Index>(l)) += x.row(i);
    ++counts[l];
  }
  for (std::size_t c = 0; c < k; ++c)
    if (counts[c] > 0) centroids.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
}

// Moves the point farthest from its centroid (among clusters with more than
// one member) into each empty cluster.
void repair_empty(const Matrix& x, std::vector<std::size_t>& labels, std::size_t k, Matrix& centroids,
                  std::vector<std::size_t>& counts) {
  for (std::size_t e = 0; e < k; ++e) {
    if (counts[e] != 0) continue;
    double worst = -1.0;
    std::size_t pick = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const auto l = labels[static_cast<std::size_t>(i)];
      if (counts[l] < 2) continue;
      const double d = sq_dist(x, i, centroids, static_cast<Eigen::Index>(l));
      if (d > worst) {
        worst = d;
        pick = static_cast<std::size_t>(i);
      }
    }
    labels[pick] = e;
    update_centroids(x, labels, k, centroids, counts);
  }
}

double inertia_of(const Matrix& x, const std::vector<std::size_t>& labels, const Matrix& centroids) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    s += sq_dist(x, i, centroids, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]));
  return s;
}

LloydRun lloyd(const Matrix& x, std::size_t k, Rng& rng, int max_iterations) {
  const auto n = static_cast<std::size_t>(x.rows());
  // k-means++ seeding
  std::vector<std::size_t> chosen;
  std::vector<char> is_chosen(n, 0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  chosen.push_back(static_cast<std::size_t>(rng.below(n)));
  is_chosen[chosen.back()] = 1;
  while (chosen.size() < k) {
    const auto last = static_cast<Eigen::Index>(chosen.back());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (x.row(static_cast<Eigen::Index>(i)) - x.row(last)).squaredNorm());
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n)  // rounding at the tail
        for (std::size_t i = n; i-- > 0;)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
    } else {
      // all remaining points coincide with a center; take an unused one
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i)
        if (!is_chosen[i]) free.push_back(i);
      pick = free[rng.below(free.size())];
    }
    chosen.push_back(pick);
    is_chosen[pick] = 1;
  }

  Matrix centroids(static_cast<Eigen::Index>(k), x.cols());
  for (std::size_t c = 0; c < k; ++c) centroids.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(chosen[c]));

  std::vector<std::size_t> labels(n, k);
  std::vector<std::size_t> counts;
  std::vector<double> trace;
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(x, static_cast<Eigen::Index>(i), centroids, static_cast<Eigen::Index>(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    update_centroids(x, labels, k, centroids, counts);
    repair_empty(x, labels, k, centroids, counts);
    trace.push_back(inertia_of(x, labels, centroids));
  }
  update_centroids(x, labels, k, centroids, counts);
  repair_empty(x, labels, k, centroids, counts);
  const double inertia = inertia_of(x, labels, centroids);
  if (trace.empty() || inertia != trace.back()) trace.push_back(inertia);
  return {std::move(labels), std::move(centroids), inertia, std::move(trace)};
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& opts) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k < 1) throw UsageError("kmeans: k must be at least 1");
  if (k > n) throw UsageError("kmeans: k=" + std::to_string(k) + " exceeds point count " + std::to_string(n));

  KMeansResult best;
  bool have = false;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    auto run = lloyd(points, k, rng, opts.max_iterations);
    if (!have || run.inertia < best.inertia) {
      best.labels = std::move(run.labels);
      best.centroids = std::move(run.centroids);
      best.inertia = run.inertia;
      best.inertia_trace = std::move(run.trace);
      have = true;
    }
  }
  return best;
}

Partition Partition::from_assignment(std::size_t k, std::vector<std::size_t> assignment) {
  if (k == 0) throw DataError("partition: k must be at least 1");
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignment) {
    if (a >= k) throw DataError("partition: cluster index " + std::to_string(a) + " outside [0, " + std::to_string(k) + ")");
    ++sizes[a];
  }
  for (std::size_t c = 0; c < k; ++c)
    if (sizes[c] == 0) throw DataError("partition: cluster " + std::to_string(c) + " is empty");
  return Partition{k, std::move(assignment)};
}

FeatureSubsets Partition::subsets() const {
  FeatureSubsets out(k);
  for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
  return out;
}

namespace {

std::vector<std::size_t> canonical_labels(const std::vector<std::size_t>& labels) {
  std::map<std::size_t, std::size_t> remap;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = remap.find(labels[i]);
    if (it == remap.end()) it = remap.emplace(labels[i], remap.size()).first;
    out[i] = it->second;
  }
  return out;
}

}  // namespace

Partition spectral_partition(const ontology::OntologyGraph& graph, std::size_t k, std::uint64_t seed,
                             LaplacianKind kind) {
  const auto n = graph.size();
  if (k < 1 || k > n)
    throw UsageError("spectral_partition: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  if (k == 1) return Partition::from_assignment(1, std::vector<std::size_t>(n, 0));
  const auto l = laplacian(graph, kind);
  const auto emb = eigen_symmetric(l, k);
  const auto km = kmeans(emb.vectors, k, seed);
  return Partition::from_assignment(k, canonical_labels(km.labels));
}

std::vector<std::size_t> connected_components(const ontology::OntologyGraph& graph) {
  const auto n = graph.size();
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> label(n, kUnset);
  std::size_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] != kUnset) continue;
    std::queue<std::size_t> q;
    q.push(s);
    label[s] = next;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v)
        if (label[v] == kUnset && graph.adjacent(u, v)) {
          label[v] = next;
          q.push(v);
        }
    }
    ++next;
  }
  return label;
}

bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return a.size() == b.size() && canonical_labels(a) == canonical_labels(b);
}

nlohmann::json partition_to_json(const Partition& p, const std::vector<std::string>& ids) {
  if (ids.size() != p.assignment.size()) throw DataError("partition_to_json: id count does not match partition size");
  nlohmann::json assignment = nlohmann::json::object();
  for (std::size_t i = 0; i < ids.size(); ++i) assignment[ids[i]] = p.assignment[i];
  return {{"k", p.k}, {"assignment", std::move(assignment)}};
}

Partition partition_from_json(const nlohmann::json& j, const std::vector<std::string>& ids) {
  try {
    const auto k = j.at("k").get<std::size_t>();
    const auto& assignment = j.at("assignment");
    if (assignment.size() != ids.size())
      throw DataError("partition covers " + std::to_string(assignment.size()) + " features, dataset has " +
                      std::to_string(ids.size()));
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      if (!assignment.contains(id)) throw DataError("partition has no entry for feature '" + id + "'");
      out.push_back(assignment.at(id).get<std::size_t>());
    }
    return Partition::from_assignment(k, std::move(out));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed partition JSON: ") + e.what());
  }
}

}  // namespace oapel::spectral
