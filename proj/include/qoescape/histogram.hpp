#ifndef QOESCAPE_HISTOGRAM_HPP
#define QOESCAPE_HISTOGRAM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "topology.hpp"

namespace qoescape {

struct CostClass {
  double cost;
  std::uint64_t count;

  friend bool operator==(const CostClass&, const CostClass&) = default;
};

/// Multiset of ordered-pair path costs, grouped by distinct cost.
///
/// This is the sufficient statistic for every metric in the library: pairs
/// with equal cost share one weight and one share, so evaluation is linear
/// in the number of distinct costs.
class CostHistogram {
 public:
  /// Sorts by cost and merges equal costs. Costs must be finite and > 0,
  /// counts >= 1, and the total pair count >= 2.
  static CostHistogram from_classes(std::vector<CostClass> classes) {
    std::sort(classes.begin(), classes.end(),
              [](const CostClass& x, const CostClass& y) { return x.cost < y.cost; });
    CostHistogram h;
    for (const auto& c : classes) {
      if (!(c.cost > 0.0) || !std::isfinite(c.cost)) {
        throw DomainError("path costs must be finite and positive");
      }
      if (c.count == 0) throw DomainError("class counts must be >= 1");
      if (!h.classes_.empty() && h.classes_.back().cost == c.cost) {
        h.classes_.back().count += c.count;
      } else {
        h.classes_.push_back(c);
      }
      h.pair_total_ += c.count;
    }
    if (h.pair_total_ < 2) throw DomainError("histogram needs at least 2 pairs");
    return h;
  }

  std::span<const CostClass> classes() const noexcept { return classes_; }
  std::size_t size() const noexcept { return classes_.size(); }
  const CostClass& operator[](std::size_t i) const { return classes_[i]; }

  std::uint64_t pair_total() const noexcept { return pair_total_; }
  double min_cost() const { return classes_.front().cost; }
  double max_cost() const { return classes_.back().cost; }

  friend bool operator==(const CostHistogram&, const CostHistogram&) = default;

 private:
  CostHistogram() = default;

  std::vector<CostClass> classes_;
  std::uint64_t pair_total_ = 0;
};

/// All-pairs hop-count histogram over ordered pairs (M = N(N-1)).
///
/// One BFS per source, split across `threads` workers (0 = hardware
/// concurrency). Per-worker counts are integers merged by addition, so the
/// result does not depend on the thread count.
inline CostHistogram hop_histogram(const Topology& g, unsigned threads = 0) {
  const std::size_t n = g.node_count();
  {
    const auto comp = component_ids(g);
    for (NodeId v = 0; v < n; ++v) {
      if (comp[v] != 0) throw ConnectivityError(g.label(0), g.label(v));
    }
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

  std::vector<std::vector<std::uint64_t>> partial(threads);
  auto work = [&](unsigned t) {
    std::vector<std::int32_t> dist(n);
    std::vector<NodeId> frontier(n);
    auto& counts = partial[t];
    for (std::size_t s = t; s < n; s += threads) {
      std::fill(dist.begin(), dist.end(), -1);
      dist[s] = 0;
      std::size_t head = 0, tail = 0;
      frontier[tail++] = static_cast<NodeId>(s);
      while (head < tail) {
        const NodeId u = frontier[head++];
        const std::int32_t du = dist[u] + 1;
        for (NodeId v : g.neighbors(u)) {
          if (dist[v] < 0) {
            dist[v] = du;
            frontier[tail++] = v;
            if (counts.size() <= static_cast<std::size_t>(du)) counts.resize(du + 1, 0);
            ++counts[du];
          }
        }
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }

  std::vector<std::uint64_t> total;
  for (const auto& counts : partial) {
    if (total.size() < counts.size()) total.resize(counts.size(), 0);
    for (std::size_t d = 0; d < counts.size(); ++d) total[d] += counts[d];
  }
  std::vector<CostClass> classes;
  for (std::size_t d = 1; d < total.size(); ++d) {
    if (total[d] > 0) classes.push_back({static_cast<double>(d), total[d]});
  }
  return CostHistogram::from_classes(std::move(classes));
}

struct Moments {
  double mean;
  double variance;  ///< population variance over ordered pairs
  double m3;        ///< E|h - mean|^3
  double m4;        ///< E|h - mean|^4
};

inline Moments moments(const CostHistogram& h) {
  const auto total = static_cast<long double>(h.pair_total());
  long double mean = 0;
  for (const auto& c : h.classes()) mean += c.cost * static_cast<long double>(c.count);
  mean /= total;
  long double m2 = 0, m3 = 0, m4 = 0;
  for (const auto& c : h.classes()) {
    const long double d = std::fabs(c.cost - mean);
    const auto n = static_cast<long double>(c.count);
    m2 += n * d * d;
    m3 += n * d * d * d;
    m4 += n * d * d * d * d;
  }
  return {static_cast<double>(mean), static_cast<double>(m2 / total),
          static_cast<double>(m3 / total), static_cast<double>(m4 / total)};
}

/// K(h0): number of pairs with cost strictly below h0.
inline std::uint64_t cumulative_count(const CostHistogram& h, double h0) {
  std::uint64_t k = 0;
  for (const auto& c : h.classes()) {
    if (c.cost >= h0) break;
    k += c.count;
  }
  return k;
}

}  // namespace qoescape

#endif  // QOESCAPE_HISTOGRAM_HPP
