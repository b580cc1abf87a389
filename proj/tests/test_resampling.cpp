#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "oapel/error.hpp"
#include "oapel/random.hpp"
#include "oapel/resampling.hpp"
#include "oracles.hpp"

using namespace oapel;
using namespace oapel::resampling;

namespace {

struct Data {
  Matrix x;
  Labels y;
  std::vector<std::vector<double>> rows;
};

Data labelled_cloud(Rng& rng, std::size_t n, std::size_t d, double positive_rate, double shift) {
  Data out;
  out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  out.y.resize(n);
  out.rows.assign(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    out.y[i] = rng.uniform() < positive_rate;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = rng.normal() + (out.y[i] ? shift : 0.0);
      out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      out.rows[i][j] = v;
    }
  }
  return out;
}

std::size_t count(const Labels& y, int v) { return static_cast<std::size_t>(std::count(y.begin(), y.end(), v)); }

}  // namespace

TEST_CASE("balanced input is returned unchanged") {
  Matrix x(4, 2);
  x << 0, 1, 2, 3, 4, 5, 6, 7;
  const Labels y = {0, 1, 0, 1};
  const auto r = smote(x, y, ResampleConfig{});
  CHECK(r.x == x);
  CHECK(r.y == y);
  CHECK(r.synthetic.empty());
}

TEST_CASE("synthetic points lie exactly on their parent segments") {
  Rng rng(1);
  for (int t = 0; t < 30; ++t) {
    const auto d = labelled_cloud(rng, 20 + rng.below(60), 1 + rng.below(8), 0.15 + 0.2 * rng.uniform(), 1.0);
    if (std::min(count(d.y, 0), count(d.y, 1)) < 2) continue;
    ResampleConfig cfg;
    cfg.seed = rng.next();
    const auto r = smote(d.x, d.y, cfg);
    const auto n = d.x.rows();
    CHECK(r.x.topRows(n) == d.x);
    REQUIRE(static_cast<Eigen::Index>(r.synthetic.size()) == r.x.rows() - n);
    for (std::size_t s = 0; s < r.synthetic.size(); ++s) {
      const auto& o = r.synthetic[s];
      CHECK(o.u >= 0.0);
      CHECK(o.u <= 1.0);
      CHECK(d.y[o.parent] == d.y[o.neighbor]);
      CHECK(o.parent != o.neighbor);
      const auto row = n + static_cast<Eigen::Index>(s);
      for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
        const double a = d.x(static_cast<Eigen::Index>(o.parent), j);
        const double b = d.x(static_cast<Eigen::Index>(o.neighbor), j);
        CHECK(r.x(row, j) == a + o.u * (b - a));
        CHECK(r.x(row, j) >= std::min(a, b));
        CHECK(r.x(row, j) <= std::max(a, b));
      }
    }
  }
}

TEST_CASE("post-SMOTE class ratio is within [0.95, 1.05]") {
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    const auto d = labelled_cloud(rng, 30 + rng.below(100), 3, 0.1 + 0.35 * rng.uniform(), 0.5);
    const auto minority = std::min(count(d.y, 0), count(d.y, 1));
    if (minority < 2 || count(d.y, 0) == count(d.y, 1)) continue;
    ResampleConfig cfg;
    cfg.seed = rng.next();
    const auto r = smote(d.x, d.y, cfg);
    const double ratio = static_cast<double>(std::min(count(r.y, 0), count(r.y, 1))) /
                         static_cast<double>(std::max(count(r.y, 0), count(r.y, 1)));
    CHECK(ratio >= 0.95);
    CHECK(ratio <= 1.05);
    CHECK(r.post_smote_ratio == doctest::Approx(ratio));
  }
}

TEST_CASE("identical minority points produce copies of that point") {
  Matrix x(6, 2);
  x << 1, 1, 1, 1, 5, 0, 6, 0, 7, 0, 8, 0;
  const Labels y = {1, 1, 0, 0, 0, 0};
  const auto r = smote(x, y, ResampleConfig{});
  REQUIRE(r.x.rows() == 8);
  for (Eigen::Index i = 6; i < 8; ++i) {
    CHECK(r.x(i, 0) == 1.0);
    CHECK(r.x(i, 1) == 1.0);
    CHECK(r.y[static_cast<std::size_t>(i)] == 1);
  }
}

TEST_CASE("minority below two samples is an error") {
  Matrix x(4, 1);
  x << 0, 1, 2, 3;
  CHECK_THROWS_AS(smote(x, Labels{1, 0, 0, 0}, ResampleConfig{}), DataError);
}

TEST_CASE("lone positive among negatives is removed") {
  Matrix x(5, 2);
  x << 0, 0, 1, 0, -1, 0, 0, 1, 10, 10;
  const Labels y = {1, 0, 0, 0, 0};
  const auto r = enn(x, y, ResampleConfig{});
  CHECK(std::find(r.kept.begin(), r.kept.end(), 0u) == r.kept.end());
  CHECK(count(r.y, 1) == 0);
}

TEST_CASE("well separated pure clusters lose nothing") {
  Rng rng(3);
  Matrix x(40, 2);
  Labels y(40);
  for (int i = 0; i < 40; ++i) {
    y[static_cast<std::size_t>(i)] = i < 20;
    x(i, 0) = rng.normal() * 0.1 + (i < 20 ? 50.0 : 0.0);
    x(i, 1) = rng.normal() * 0.1;
  }
  const auto r = enn(x, y, ResampleConfig{});
  CHECK(r.kept.size() == 40);
  CHECK(r.x == x);
}

TEST_CASE("tied vote keeps the sample") {
  // Point 0 has one neighbour of each label among its two nearest.
  Matrix x(4, 1);
  x << 0.0, 1.0, -1.0, 100.0;
  const Labels y = {1, 1, 0, 0};
  ResampleConfig cfg;
  cfg.enn_neighbors = 2;
  const auto r = enn(x, y, cfg);
  CHECK(std::find(r.kept.begin(), r.kept.end(), 0u) != r.kept.end());
}

TEST_CASE("ENN agrees with a direct implementation of the rule") {
  Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    const auto d = labelled_cloud(rng, 8 + rng.below(80), 1 + rng.below(6), 0.3 + 0.4 * rng.uniform(), 0.8);
    ResampleConfig cfg;
    cfg.enn_neighbors = 1 + static_cast<int>(rng.below(5));
    if (d.y.size() <= static_cast<std::size_t>(cfg.enn_neighbors)) continue;
    const auto r = enn(d.x, d.y, cfg);
    const auto expect = oracle::enn_keep(d.rows, d.y, cfg.enn_neighbors);
    CHECK(r.kept == expect);
    CHECK(r.x.rows() == static_cast<Eigen::Index>(expect.size()));
  }
}

TEST_CASE("ENN needs more samples than neighbours") {
  Matrix x(3, 1);
  x << 0, 1, 2;
  CHECK_THROWS_AS(enn(x, Labels{0, 1, 0}, ResampleConfig{}), DataError);
}

TEST_CASE("smote_enn: ENN never adds, labels stay binary, synthetic rows stay collinear") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto d = labelled_cloud(rng, 30 + rng.below(60), 4, 0.2 + 0.2 * rng.uniform(), 1.0);
    if (std::min(count(d.y, 0), count(d.y, 1)) < 2) continue;
    ResampleConfig cfg;
    cfg.seed = rng.next();
    const auto s = smote(d.x, d.y, cfg);
    const auto both = smote_enn(d.x, d.y, cfg);
    CHECK(both.x.rows() <= s.x.rows());
    for (int v : both.y) CHECK((v == 0 || v == 1));
    // The ENN stage is exactly ENN applied to the SMOTE output.
    const auto e = enn(s.x, s.y, cfg);
    CHECK(both.x == e.x);
    CHECK(both.y == e.y);
  }
}

TEST_CASE("nearest neighbours break distance ties by index") {
  Matrix x(5, 1);
  x << 0.0, 1.0, -1.0, 2.0, -2.0;
  const std::vector<std::size_t> all = {0, 1, 2, 3, 4};
  CHECK(nearest_neighbors(x, 0, all, 4) == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK(nearest_neighbors(x, 0, {0, 2, 1}, 1) == std::vector<std::size_t>{1});
}

TEST_CASE("SMOTE is deterministic given the seed") {
  Rng rng(6);
  const auto d = labelled_cloud(rng, 50, 3, 0.25, 1.0);
  ResampleConfig cfg;
  cfg.seed = 99;
  const auto a = smote_enn(d.x, d.y, cfg);
  const auto b = smote_enn(d.x, d.y, cfg);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
}

TEST_CASE("config validation and json") {
  ResampleConfig cfg;
  cfg.smote_neighbors = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = ResampleConfig{};
  cfg.enn_neighbors = 4;
  cfg.target_ratio = 0.8;
  CHECK(resample_config_from_json(to_json(cfg)).enn_neighbors == 4);
  CHECK(resample_config_from_json(to_json(cfg)).target_ratio == 0.8);
}
