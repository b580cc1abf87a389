// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oapel/boosting.hpp"
#include "oapel/commands.hpp"
#include "oapel/error.hpp"
#include "oapel/evaluation.hpp"
#include "oapel/metanet.hpp"
#include "oapel/random.hpp"
#include "oapel/resampling.hpp"
#include "oapel/spectral.hpp"
#include "oapel/stats.hpp"
#include "oapel/synthdata.hpp"
#include "oracles.hpp"

using namespace oapel;
using ontology::OntologyGraph;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

OntologyGraph from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<ontology::FeatureDescriptor> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(ontology::FeatureDescriptor::make("v" + std::to_string(i), ontology::MetricType::kVolume));
  std::vector<std::uint8_t> a(n * n, 0);
  for (auto [i, j] : edges) a[i * n + j] = a[j * n + i] = 1;
  return OntologyGraph(std::move(v), std::move(a));
}

std::vector<std::vector<int>> adjacency_lists(const OntologyGraph& g) {
  std::vector<std::vector<int>> adj(g.size(), std::vector<int>(g.size(), 0));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) adj[i][j] = g.adjacent(i, j);
  return adj;
}

// --- 1 ----------------------------------------------------------------------

void spectral_recovery() {
  Rng rng(1);
  int recovered = 0;
  double slowest = 0.0;
  std::size_t largest = 0;
  for (int t = 0; t < 20; ++t) {
    const auto k = 1 + rng.below(8);
    std::vector<std::size_t> sizes;
    for (std::uint64_t c = 0; c < k; ++c) sizes.push_back(1 + rng.below(50));
    std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t at = 0;
    for (auto s : sizes) {
      for (std::size_t a = at; a < at + s; ++a)
        for (std::size_t b = a + 1; b < at + s; ++b) edges.emplace_back(order[a], order[b]);
      at += s;
    }
    const auto g = from_edges(n, edges);
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = spectral::spectral_partition(g, k, rng.next());
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    largest = std::max(largest, n);
    const auto comps = oracle::bfs_components(adjacency_lists(g));
    recovered += oracle::same_grouping(p.assignment, comps) && secs < 5.0;
  }
  report(1, recovered == 20,
         fmt("spectral partition equals connected components on %d/20 clique unions (n up to %zu, slowest %.2f s)", recovered,
             largest, slowest));
}

// --- 2 ----------------------------------------------------------------------

void laplacian_invariants() {
  Rng rng(2);
  int ok = 0;
  double worst_row = 0.0, min_eig = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto n = 1 + rng.below(80);
    const double p = rng.uniform() * 3.0 / static_cast<double>(n);
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.uniform() < p) e.emplace_back(i, j);
    const auto g = from_edges(n, e);
    const auto l = spectral::laplacian(g);
    const double row = l.rowwise().sum().cwiseAbs().maxCoeff();
    const auto emb = spectral::eigen_symmetric(l, n);
    const auto zeros = std::count_if(emb.values.begin(), emb.values.end(), [](double v) { return std::abs(v) < 1e-8; });
    const auto comps = oracle::bfs_components(adjacency_lists(g));
    const auto ncomp = static_cast<long>(*std::max_element(comps.begin(), comps.end()) + 1);
    worst_row = std::max(worst_row, row);
    min_eig = std::min(min_eig, emb.values.front());
    ok += row < 1e-10 && emb.values.front() >= -1e-8 && zeros == ncomp;
  }
  report(2, ok == 50,
         fmt("Laplacian invariants hold on %d/50 random graphs (max |row sum| %.1e, min eigenvalue %.1e)", ok, worst_row, min_eig));
}

// --- 3 ----------------------------------------------------------------------

void boosting_oracle() {
  Rng rng(3);
  int match = 0, splits = 0;
  boosting::BoostParams params;
  params.rounds = 1;
  params.max_depth = 1;
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = std::size_t{4} << rng.below(4);
    const std::size_t d = 1 + rng.below(5);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    Labels y(n);
    do {
      for (auto& v : y) v = static_cast<int>(rng.below(2));
    } while (std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; }));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double v = static_cast<double>(rng.below(32)) / 8.0 - 2.0;
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        rows[i][j] = v;
      }
    const auto m = boosting::fit_boosted(x, y, params);
    const auto o = oracle::best_stump(rows, y, params.leaf_penalty, params.split_penalty);
    const auto& root = m.trees.at(0).nodes.at(0);
    if (o.gain > 0) {
      ++splits;
      match += !root.is_leaf() && root.feature == o.feature && root.threshold == o.threshold && root.gain == o.gain;
    } else {
      match += root.is_leaf();
    }
  }
  report(3, match == 30, fmt("first-round stump equals exhaustive search on %d/30 datasets (%d with a split)", match, splits));
}

// --- 4 ----------------------------------------------------------------------

void meta_gradients() {
  Rng rng(4);
  const double step = 1e-5;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto k = 1 + rng.below(8);
    const auto h = 1 + rng.below(12);
    const auto m = 2 + rng.below(30);
    Matrix p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
    Labels y(m);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.uniform();
    for (auto& v : y) v = static_cast<int>(rng.below(2));
    metanet::MetaNet net;
    double min_pre = 0.0;
    // A difference quotient across a ReLU kink is not a derivative.
    do {
      net = metanet::init_net(k, h, rng.next());
      for (Eigen::Index i = 0; i < net.b1.size(); ++i) net.b1(i) = rng.normal() * 0.5;
      net.b2 = rng.normal() * 0.5;
      const Eigen::MatrixXd pre = (p * net.w1.transpose()).rowwise() + net.b1.transpose();
      min_pre = pre.cwiseAbs().minCoeff();
    } while (min_pre < 1e-3);
    const double l2 = t % 3 == 0 ? 0.0 : rng.uniform() * 0.1;
    const auto g = metanet::loss_and_gradient(net, p, y, l2);
    std::vector<double> analytic;
    std::vector<double*> params;
    for (Eigen::Index i = 0; i < net.w1.size(); ++i) analytic.push_back(g.w1.data()[i]), params.push_back(net.w1.data() + i);
    for (Eigen::Index i = 0; i < net.b1.size(); ++i) analytic.push_back(g.b1(i)), params.push_back(&net.b1(i));
    for (Eigen::Index i = 0; i < net.w2.size(); ++i) analytic.push_back(g.w2(i)), params.push_back(&net.w2(i));
    analytic.push_back(g.b2);
    params.push_back(&net.b2);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double keep = *params[i];
      *params[i] = keep + step;
      const double up = metanet::loss(net, p, y, l2);
      *params[i] = keep - step;
      const double down = metanet::loss(net, p, y, l2);
      *params[i] = keep;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max({std::abs(analytic[i]), std::abs(numeric), 1e-4}));
    }
  }
  report(4, worst < 1e-5, fmt("meta-net gradient max relative error %.2e over 20 configurations", worst));
}

// --- 5 ----------------------------------------------------------------------

void auc_correctness() {
  Rng rng(5);
  int exact = 0;
  for (int t = 0; t < 100; ++t) {
    const auto n = 2 + rng.below(80);
    const auto levels = 1 + rng.below(12);
    std::vector<double> s(n);
    Labels y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels) + (t % 2 ? rng.uniform() : 0.0);
      y[i] = rng.uniform() < 0.4;
    }
    y[0] = 0;
    y[1] = 1;
    exact += evaluation::auc(s, y) == oracle::pairwise_auc(s, y);
  }
  const double hand = evaluation::auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, Labels{0, 0, 1, 1});
  report(5, exact == 100 && hand == 0.75, fmt("AUC equals pairwise count on %d/100 inputs; hand case %.4f", exact, hand));
}

// --- 6 ----------------------------------------------------------------------

void kappa_boundaries() {
  const double agree = evaluation::kappa_from_table(0.5, 0.0, 0.0, 0.5);
  const double indep = evaluation::kappa_from_table(0.25, 0.25, 0.25, 0.25);
  const double compl_ = evaluation::kappa_from_table(0.0, 0.5, 0.5, 0.0);
  const Labels y = {1, 0, 1, 1, 0, 0, 1, 0};
  const Labels a = {1, 0, 0, 1, 1, 0, 1, 1};
  Labels flip(a.size());
  std::transform(a.begin(), a.end(), flip.begin(), [](int v) { return 1 - v; });
  const double same = evaluation::kappa_pair(a, a, y).kappa;
  const double opposite = evaluation::kappa_pair(a, flip, y).kappa;
  report(6, agree == 1.0 && indep == 0.0 && compl_ == -1.0 && same == 1.0 && opposite == -1.0,
         fmt("kappa agreement %g, independence %g, complement %g; identical outputs %g, complementary outputs %g", agree, indep,
             compl_, same, opposite));
}

// --- 7 ----------------------------------------------------------------------

synthdata::SynthOutput null_synth(std::uint64_t seed, std::size_t n) {
  synthdata::SynthSpec s;
  s.regions = 4;
  s.subjects = n;
  s.informative = {};
  s.effect = 0.0;
  s.seed = seed;
  return synthdata::generate(s);
}

void no_leakage() {
  baselines::BaselineConfig cfg;
  cfg.ensemble.boost.rounds = 15;
  cfg.ensemble.meta.epochs = 150;
  const evaluation::HyperGrid grid;

  auto copy = null_synth(70, 20);
  for (std::size_t i = 0; i < copy.data.size(); ++i) copy.data.x(static_cast<Eigen::Index>(i), 0) = copy.data.y[i];
  const auto probe = evaluation::nested_loocv(copy.data, evaluation::make_trainer("DT", cfg, &copy.graph, 4), grid, 71);
  const double copy_auc = evaluation::auc(probe.probs, probe.labels);

  const auto g = null_synth(72, 20);
  const auto trainer = evaluation::make_trainer("OAP-EL", cfg, &g.graph, 4);
  double sum = 0.0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    auto d = g.data;
    Rng rng(derive_seed(73, r));
    for (std::size_t i = d.y.size(); i > 1; --i) std::swap(d.y[i - 1], d.y[rng.below(i)]);
    const auto res = evaluation::nested_loocv(d, trainer, grid, derive_seed(74, r));
    sum += evaluation::auc(res.probs, res.labels);
  }
  const double null_auc = sum / 50.0;
  report(7, copy_auc == 1.0 && null_auc >= 0.40 && null_auc <= 0.60,
         fmt("label-copy nested LOOCV AUC %.4f; permuted labels mean AUC %.4f over 50 replications", copy_auc, null_auc));
}

// --- 8, 9 -------------------------------------------------------------------

void synthetic_benchmark() {
  const auto t0 = std::chrono::steady_clock::now();
  const baselines::BaselineConfig cfg;
  const pipeline::HyperParams hp;  // meta l2 0.001, depth 2
  const std::size_t k = 6;
  std::vector<double> oap, ab;
  int kappa_lower = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    synthdata::SynthSpec spec;
    spec.seed = seed;
    const auto s = synthdata::generate(spec);
    const auto ro = evaluation::loocv(s.data, evaluation::make_trainer("OAP-EL", cfg, &s.graph, k), hp, seed);
    const auto ra = evaluation::loocv(s.data, evaluation::make_trainer("AB-EL", cfg, &s.graph, k), hp, seed);
    oap.push_back(evaluation::auc(ro.probs, ro.labels));
    ab.push_back(evaluation::auc(ra.probs, ra.labels));
    const double ko = evaluation::mean_kappa(evaluation::kappa_error_cloud(evaluation::base_predictions(ro), ro.labels));
    const double ka = evaluation::mean_kappa(evaluation::kappa_error_cloud(evaluation::base_predictions(ra), ra.labels));
    kappa_lower += ko < ka;
  }
  const double secs = seconds_since(t0);
  const double mo = std::accumulate(oap.begin(), oap.end(), 0.0) / 30.0;
  const double ma = std::accumulate(ab.begin(), ab.end(), 0.0) / 30.0;
  const auto t = stats::t_test_paired(oap, ab);
  report(8, mo - ma >= 0.03 && t.p_value < 0.05 && secs < 1800.0,
         fmt("OAP-EL mean AUC %.4f vs AB-EL %.4f (difference %.4f, paired p %.2e) over 30 seeds in %.0f s", mo, ma, mo - ma,
             t.p_value, secs));
  report(9, kappa_lower >= 24, fmt("OAP-EL mean pairwise kappa below AB-EL in %d/30 seeds", kappa_lower));
}

// --- 10 ---------------------------------------------------------------------

void smote_enn() {
  Rng rng(10);
  int ratio_ok = 0, collinear_ok = 0, enn_ok = 0, cases = 0;
  double lo = 1.0, hi = 1.0;
  while (cases < 30) {
    const auto n = 30 + rng.below(100);
    const auto d = 1 + rng.below(8);
    const double rate = 0.1 + 0.3 * rng.uniform();
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Labels y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform() < rate;
      for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal() + (y[i] ? 0.8 : 0.0);
    }
    const auto pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    if (std::min(pos, n - pos) < 2 || pos * 2 == n) continue;
    ++cases;
    resampling::ResampleConfig cfg;
    cfg.seed = rng.next();
    const auto s = resampling::smote(x, y, cfg);
    const auto sp = static_cast<double>(std::count(s.y.begin(), s.y.end(), 1));
    const double ratio = std::min(sp, static_cast<double>(s.y.size()) - sp) / std::max(sp, static_cast<double>(s.y.size()) - sp);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    ratio_ok += ratio >= 0.95 && ratio <= 1.05;
    bool collinear = true;
    for (std::size_t r = 0; r < s.synthetic.size(); ++r) {
      const auto& o = s.synthetic[r];
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double a = x(static_cast<Eigen::Index>(o.parent), j), b = x(static_cast<Eigen::Index>(o.neighbor), j);
        collinear = collinear && s.x(x.rows() + static_cast<Eigen::Index>(r), j) == a + o.u * (b - a) && o.u >= 0.0 && o.u <= 1.0;
      }
    }
    collinear_ok += collinear;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(s.x.rows()), std::vector<double>(d));
    for (Eigen::Index i = 0; i < s.x.rows(); ++i)
      for (Eigen::Index j = 0; j < s.x.cols(); ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s.x(i, j);
    enn_ok += resampling::enn(s.x, s.y, cfg).kept == oracle::enn_keep(rows, s.y, cfg.enn_neighbors);
  }
  report(10, ratio_ok == 30 && collinear_ok == 30 && enn_ok == 30,
         fmt("SMOTE ratio in [0.95, 1.05] on %d/30 (range %.3f..%.3f); collinear on %d/30; ENN equals direct 3-NN rule on %d/30",
             ratio_ok, lo, hi, collinear_ok, enn_ok));
}

// --- 11 ---------------------------------------------------------------------

void statistics() {
  Rng rng(11);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto nx = 2 + rng.below(40), ny = 2 + rng.below(40);
    std::vector<double> x(nx), y(ny), b(nx);
    const double shift = rng.normal();
    for (auto& v : x) v = rng.normal() + shift;
    for (auto& v : y) v = rng.normal() * (0.5 + rng.uniform());
    for (std::size_t i = 0; i < nx; ++i) b[i] = x[i] + 0.3 * shift + 0.7 * rng.normal();
    const auto u = stats::t_test_unpaired(x, y);
    const auto p = stats::t_test_paired(x, b);
    const std::array<std::array<double, 2>, 2> table = {{{static_cast<double>(1 + rng.below(80)), static_cast<double>(1 + rng.below(80))},
                                                         {static_cast<double>(1 + rng.below(80)), static_cast<double>(1 + rng.below(80))}}};
    const auto c = stats::chi_squared_2x2(table);
    worst = std::max({worst, std::abs(u.p_value - oracle::t_p_value(u.statistic, u.df)),
                      std::abs(p.p_value - oracle::t_p_value(p.statistic, p.df)),
                      std::abs(c.p_value - oracle::chi2_1_p_value(c.statistic))});
  }
  const std::vector<double> same = {1.5, 2.0, 4.25, 3.0};
  const double p_same = stats::t_test_unpaired(same, same).p_value;
  const double p_paired = stats::t_test_paired(same, same).p_value;
  report(11, worst < 1e-6 && p_same == 1.0 && p_paired == 1.0,
         fmt("max |p - quadrature| %.2e over 50 cases; identical samples p = %g (unpaired), %g (paired)", worst, p_same, p_paired));
}

// --- 12 ---------------------------------------------------------------------

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "oapel");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  const int code = cli::run(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  const auto dir = fs::temp_directory_path() / "oapel_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  cli::RunConfig cfg;
  cfg.k = 3;
  cfg.replications = 3;
  cfg.nested = false;
  cfg.ensemble.boost.rounds = 20;
  cfg.ensemble.meta.epochs = 200;
  cfg.baselines.ensemble = cfg.ensemble;
  cfg.synth.regions = 4;
  cfg.synth.subjects = 40;
  cfg.synth.informative = synthdata::SynthSpec::metric_cells(4, 1);
  cfg.models = {"OAP-EL", "AB-EL", "LR"};
  std::ofstream(dir / "config.json") << cli::to_json(cfg).dump(2);
  const auto data = dir / "data";
  bool ok = cli({"synth", "--config", (dir / "config.json").string(), "--out", data.string()}) == 0;
  ok = ok && cli({"compare", "--config", (dir / "config.json").string(), "--features", (data / "features.csv").string(), "--labels",
                  (data / "labels.csv").string(), "--parcellation", (data / "parcellation.onto").string(), "--metrics",
                  (data / "metrics.onto").string(), "--out", (dir / "run1").string()}) == 0;
  const auto manifest = (dir / "run1" / "manifest.json").string();
  ok = ok && cli({"compare", "--config", manifest, "--out", (dir / "run2").string()}) == 0;
  ok = ok && cli({"compare", "--config", manifest, "--out", (dir / "run3").string()}) == 0;
  const auto a = slurp(dir / "run2" / "compare.json");
  const auto b = slurp(dir / "run3" / "compare.json");
  const bool same = ok && !a.empty() && a == b && a == slurp(dir / "run1" / "compare.json");
  report(12, same, fmt("two compare runs from one manifest produce %s reports (%zu bytes)", same ? "byte-identical" : "different",
                       a.size()));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {spectral_recovery, laplacian_invariants, boosting_oracle, meta_gradients,
                                                       auc_correctness,   kappa_boundaries,     no_leakage,      synthetic_benchmark,
                                                       smote_enn,         statistics,           determinism};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      std::printf("FAIL: unexpected error: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
