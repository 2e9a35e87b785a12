// Independent reference computations used by the tests. Nothing here calls
// into the library's numeric code paths.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include <qoescape/qoescape.hpp>

namespace oracle {

using qoescape::CostHistogram;
using qoescape::Topology;

/// Ordered-pair distance counts by Floyd-Warshall on the adjacency matrix.
inline std::map<int, std::uint64_t> floyd_warshall_counts(const Topology& g) {
  const std::size_t n = g.node_count();
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t u = 0; u < n; ++u) {
    d[u][u] = 0;
    for (auto v : g.neighbors(static_cast<qoescape::NodeId>(u))) d[u][v] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  std::map<int, std::uint64_t> counts;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) ++counts[d[i][j]];
  return counts;
}

inline std::map<int, std::uint64_t> as_map(const CostHistogram& h) {
  std::map<int, std::uint64_t> m;
  for (const auto& c : h.classes()) m[static_cast<int>(c.cost)] = c.count;
  return m;
}

struct PairwiseResult {
  double imbalance;
  double s_bar;
  double entropy_bits;
};

/// Expands the histogram to M individual pairs and evaluates the metric
/// pair by pair with the textbook formulas, in long double.
inline PairwiseResult per_pair(const CostHistogram& h, double a, double h0) {
  std::vector<long double> w;
  for (const auto& c : h.classes())
    for (std::uint64_t i = 0; i < c.count; ++i)
      w.push_back(1.0L / (1.0L + std::exp(static_cast<long double>(a) * (c.cost - h0))));
  long double total = 0;
  for (auto x : w) total += x;
  long double entropy = 0;
  for (auto x : w) {
    const long double p = x / total;
    if (p > 0) entropy -= p * std::log2(p);
  }
  const long double m = static_cast<long double>(w.size());
  const long double hmax = std::log2(m);
  return {static_cast<double>(1.0L - entropy / hmax), static_cast<double>(total / m),
          static_cast<double>(entropy)};
}

/// Two classes {c: 1, c + 1: 1} at the midpoint threshold: I = 1 - H_b(sigma(a/2)).
inline double two_class_imbalance(double a) {
  const long double p = 1.0L / (1.0L + std::exp(-static_cast<long double>(a) / 2.0L));
  const long double hb = -p * std::log2(p) - (1 - p) * std::log2(1 - p);
  return static_cast<double>(1.0L - hb);
}

/// Small-a slope of the two-class law: 1 / (32 ln 2).
inline double two_class_slope() { return 1.0 / (32.0 * std::numbers::ln2); }

/// Star(n): 2(n-1) pairs at distance 1, (n-1)(n-2) at distance 2.
inline std::map<int, std::uint64_t> star_counts(std::uint64_t n) {
  return {{1, 2 * (n - 1)}, {2, (n - 1) * (n - 2)}};
}

/// Path(n): 2(n-d) ordered pairs at distance d.
inline std::map<int, std::uint64_t> path_counts(std::uint64_t n) {
  std::map<int, std::uint64_t> m;
  for (std::uint64_t d = 1; d < n; ++d) m[static_cast<int>(d)] = 2 * (n - d);
  return m;
}

/// Rows x cols lattice: Manhattan distance over all ordered cell pairs.
inline std::map<int, std::uint64_t> grid_counts(int rows, int cols) {
  std::map<int, std::uint64_t> m;
  for (int r1 = 0; r1 < rows; ++r1)
    for (int c1 = 0; c1 < cols; ++c1)
      for (int r2 = 0; r2 < rows; ++r2)
        for (int c2 = 0; c2 < cols; ++c2)
          if (r1 != r2 || c1 != c2) ++m[std::abs(r1 - r2) + std::abs(c1 - c2)];
  return m;
}

/// Population variance of the distances in a count map.
inline double variance(const std::map<int, std::uint64_t>& m) {
  long double n = 0, s = 0, s2 = 0;
  for (auto [d, c] : m) {
    n += c;
    s += static_cast<long double>(c) * d;
    s2 += static_cast<long double>(c) * d * d;
  }
  const long double mean = s / n;
  return static_cast<double>(s2 / n - mean * mean);
}

inline CostHistogram histogram_of(const std::map<int, std::uint64_t>& m) {
  std::vector<qoescape::CostClass> v;
  for (auto [d, c] : m) v.push_back({static_cast<double>(d), c});
  return CostHistogram::from_classes(v);
}

/// Second central difference of I along h0 (double FD of evaluate).
inline double d2_h0h0_double_fd(const CostHistogram& h, double a, double h0, double step) {
  auto at = [&](double x) { return per_pair(h, a, x).imbalance; };
  return (at(h0 + step) - 2 * at(h0) + at(h0 - step)) / (step * step);
}

}  // namespace oracle
