// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library code it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <vector>

namespace oracle {

// --- boosting ---------------------------------------------------------------

struct Stump {
  int feature = -1;
  double threshold = 0.0;
  double gain = -std::numeric_limits<double>::infinity();
};

// Exhaustive depth-1 search for the first boosting round: start at the
// prevalence, g = p - y, h = p(1 - p); every midpoint between consecutive
// distinct values of every feature; first strict maximum wins.
inline Stump best_stump(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double eta, double gamma) {
  const auto n = y.size();
  double p = 0.0;
  for (int v : y) p += v;
  p /= static_cast<double>(n);
  std::vector<double> g(n), h(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = p - y[i];
    h[i] = p * (1.0 - p);
  }
  Stump best;
  const auto d = x.front().size();
  for (std::size_t j = 0; j < d; ++j) {
    std::set<double> values;
    for (std::size_t i = 0; i < n; ++i) values.insert(x[i][j]);
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t t = 0; t + 1 < v.size(); ++t) {
      const double thr = 0.5 * (v[t] + v[t + 1]);
      double gl = 0, hl = 0, gr = 0, hr = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i][j] < thr) {
          gl += g[i];
          hl += h[i];
        } else {
          gr += g[i];
          hr += h[i];
        }
      }
      const double G = gl + gr, H = hl + hr;
      const double gain = 0.5 * (gl * gl / (hl + eta) + gr * gr / (hr + eta) - G * G / (H + eta)) - gamma;
      if (gain > best.gain) best = {static_cast<int>(j), thr, gain};
    }
  }
  return best;
}

// --- metrics ----------------------------------------------------------------

inline double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double concordant = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j])
        concordant += 1.0;
      else if (s[i] == s[j])
        concordant += 0.5;
    }
  return concordant / pairs;
}

// --- graphs -----------------------------------------------------------------

// Component label per vertex, numbered in order of first appearance.
inline std::vector<int> bfs_components(const std::vector<std::vector<int>>& adj) {
  const auto n = adj.size();
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::queue<std::size_t> q;
    q.push(s);
    label[s] = next;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v)
        if (adj[u][v] && label[v] < 0) {
          label[v] = next;
          q.push(v);
        }
    }
    ++next;
  }
  return label;
}

// Same partition up to renaming of the labels.
template <typename A, typename B>
bool same_grouping(const std::vector<A>& a, const std::vector<B>& b) {
  if (a.size() != b.size()) return false;
  std::map<A, B> ab;
  std::map<B, A> ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it, fresh] = ab.emplace(a[i], b[i]);
    if (!fresh && it->second != b[i]) return false;
    auto [jt, fresh2] = ba.emplace(b[i], a[i]);
    if (!fresh2 && jt->second != a[i]) return false;
  }
  return true;
}

// --- resampling -------------------------------------------------------------

// Edited nearest neighbours, single pass: drop a sample when a strict
// majority of its k nearest others (Euclidean, ties by lower index) carry
// the other label. Returns the kept row indices.
inline std::vector<std::size_t> enn_keep(const std::vector<std::vector<double>>& x, const std::vector<int>& y, int k) {
  const auto n = x.size();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < x[i].size(); ++c) s += (x[i][c] - x[j][c]) * (x[i][c] - x[j][c]);
      d.emplace_back(s, j);
    }
    std::sort(d.begin(), d.end());
    int disagree = 0;
    for (int t = 0; t < k; ++t) disagree += y[d[static_cast<std::size_t>(t)].second] != y[i];
    if (2 * disagree <= k) keep.push_back(i);
  }
  return keep;
}

// --- statistics -------------------------------------------------------------

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

// Two-sided p of Student's t by integrating the density over [0, |t|].
inline double t_p_value(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) / std::sqrt(df * M_PI);
  const auto dens = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0); };
  // Split the range so each piece is smooth on its own scale.
  const double a = std::abs(t);
  double inner = 0.0;
  double lo = 0.0;
  for (double hi : {1.0, 4.0, 16.0, 64.0, 256.0, 1024.0}) {
    if (lo >= a) break;
    inner += integrate(dens, lo, std::min(hi, a));
    lo = hi;
  }
  if (a > lo) inner += integrate(dens, lo, a);
  return std::max(0.0, 1.0 - 2.0 * inner);
}

// Upper tail of chi-squared(1) via s = u^2: P = 1 - 2 * int_0^sqrt(x) phi(u) du.
inline double chi2_1_p_value(double x) {
  const auto phi = [](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI); };
  const double r = std::sqrt(std::max(0.0, x));
  double inner = 0.0;
  double lo = 0.0;
  for (double hi : {1.0, 2.0, 4.0, 8.0}) {
    if (lo >= r) break;
    inner += integrate(phi, lo, std::min(hi, r));
    lo = hi;
  }
  if (r > lo) inner += integrate(phi, lo, r);
  return std::max(0.0, 1.0 - 2.0 * inner);
}

// Student's t statistic (pooled variance) computed from scratch.
inline double t_statistic_unpaired(const std::vector<double>& x, const std::vector<double>& y) {
  const auto m = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  const double mx = m(x), my = m(y);
  double ss = 0.0;
  for (double v : x) ss += (v - mx) * (v - mx);
  for (double v : y) ss += (v - my) * (v - my);
  const double df = static_cast<double>(x.size() + y.size() - 2);
  return (mx - my) / std::sqrt(ss / df * (1.0 / x.size() + 1.0 / y.size()));
}

// --- sampling ---------------------------------------------------------------

// Three-sigma binomial band for `trials` draws at probability p.
inline bool within_three_sigma(double count, double trials, double p) {
  const double sd = std::sqrt(trials * p * (1.0 - p));
  return std::abs(count - trials * p) <= 3.0 * sd;
}

}  // namespace oracle
