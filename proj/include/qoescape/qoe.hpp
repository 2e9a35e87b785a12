#ifndef QOESCAPE_QOE_HPP
#define QOESCAPE_QOE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "histogram.hpp"

namespace qoescape {

/// SLA parameters: strictness a (per unit cost) and threshold h0.
class SlaPoint {
 public:
  SlaPoint(double a, double h0) : a_(a), h0_(h0) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("strictness a must be finite and > 0");
    if (!(h0 > 0.0) || !std::isfinite(h0)) throw DomainError("threshold h0 must be finite and > 0");
  }

  double a() const noexcept { return a_; }
  double h0() const noexcept { return h0_; }

  friend bool operator==(const SlaPoint&, const SlaPoint&) = default;

 private:
  double a_;
  double h0_;
};

namespace detail {

/// log(1 + e^x) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// 1 / (1 + e^x) without overflow.
inline double logistic_complement(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

}  // namespace detail

/// w = 1 / (1 + exp[a (cost - h0)]), evaluated in the overflow-safe branch.
inline double satisfaction_weight(double cost, const SlaPoint& sla) {
  return detail::logistic_complement(sla.a() * (cost - sla.h0()));
}

struct ClassRow {
  double cost;
  std::uint64_t count;
  double weight;  ///< w, identical for every pair in the class
  double share;   ///< p = w / W, per pair
};

struct QoeSnapshot {
  SlaPoint sla;
  std::vector<ClassRow> classes;
  double total_weight;       ///< W
  double mean_satisfaction;  ///< s_bar = W / M
  double entropy_bits;       ///< H
  double imbalance;          ///< I = 1 - H / log2 M
  std::uint64_t pair_total;  ///< M
};

namespace detail {

/// Per-class quantities shared by evaluation and differentiation.
///
/// Weights are handled as max-shifted logs so shares stay finite and
/// normalized even when every raw weight underflows (large a, h0 below the
/// minimum cost). `log_ratio` is ln(M p) = ln(w / s_bar), which stays
/// accurate near the uniform distribution where ln p alone would cancel.
struct ClassTerms {
  std::vector<double> weight;
  std::vector<double> one_minus_weight;
  std::vector<double> log_weight;
  std::vector<double> share;
  std::vector<double> log_share;
  std::vector<double> log_ratio;
  double gap_nats = 0;  ///< ln M - H (natural units)
};

inline ClassTerms class_terms(const CostHistogram& h, const SlaPoint& sla) {
  const std::size_t k = h.size();
  const double log_m = std::log(static_cast<double>(h.pair_total()));
  ClassTerms t;
  t.weight.resize(k);
  t.one_minus_weight.resize(k);
  t.log_weight.resize(k);
  t.share.resize(k);
  t.log_share.resize(k);
  t.log_ratio.resize(k);

  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    const double x = sla.a() * (h[j].cost - sla.h0());
    t.log_weight[j] = -softplus(x);
    t.weight[j] = logistic_complement(x);
    t.one_minus_weight[j] = logistic_complement(-x);
    shift = std::max(shift, t.log_weight[j]);
  }
  // scaled = sum_j n_j exp(lw_j - shift) / M, so s_bar = exp(shift) * scaled.
  double scaled = 0;
  for (std::size_t j = 0; j < k; ++j) {
    scaled += static_cast<double>(h[j].count) * std::exp(t.log_weight[j] - shift);
  }
  scaled /= static_cast<double>(h.pair_total());
  const double log_scaled = std::log(scaled);

  double gap = 0;
  for (std::size_t j = 0; j < k; ++j) {
    t.log_ratio[j] = (t.log_weight[j] - shift) - log_scaled;
    t.log_share[j] = t.log_ratio[j] - log_m;
    t.share[j] = std::exp(t.log_share[j]);
    gap += static_cast<double>(h[j].count) * t.share[j] * t.log_ratio[j];
  }
  t.gap_nats = std::max(0.0, gap);
  return t;
}

}  // namespace detail

/// Evaluates weights, shares, s_bar, H and I over cost classes.
inline QoeSnapshot evaluate(const CostHistogram& h, const SlaPoint& sla) {
  const auto t = detail::class_terms(h, sla);
  const double log2_m = std::log2(static_cast<double>(h.pair_total()));
  const double gap_bits = t.gap_nats / std::numbers::ln2;

  std::vector<ClassRow> rows;
  rows.reserve(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) {
    rows.push_back({h[j].cost, h[j].count, t.weight[j], t.share[j]});
  }
  double total_weight = 0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    total_weight += static_cast<double>(h[j].count) * t.weight[j];
  }
  return QoeSnapshot{sla,
                     std::move(rows),
                     total_weight,
                     total_weight / static_cast<double>(h.pair_total()),
                     log2_m - gap_bits,
                     std::min(1.0, gap_bits / log2_m),
                     h.pair_total()};
}

// ---------------------------------------------------------------------------
// Explicit share vectors (axiom checks, independent of any graph)

class ShareVector {
 public:
  explicit ShareVector(std::vector<double> values) : values_(std::move(values)) {
    double sum = 0;
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("shares must be finite and >= 0");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
      throw DomainError("shares must sum to 1 (got " + std::to_string(sum) + ")");
    }
  }

  /// Normalizes nonnegative raw scores into shares.
  static ShareVector from_scores(std::span<const double> scores) {
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    if (!(total > 0.0)) throw DomainError("scores must have positive total");
    std::vector<double> v(scores.begin(), scores.end());
    for (double& x : v) x /= total;
    // Renormalize once more so the sum lands within rounding of 1.
    const double again = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) x /= again;
    return ShareVector(std::move(v));
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// Shannon entropy in bits, with 0 log 0 = 0.
inline double entropy_bits(std::span<const double> p) {
  double h = 0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log2(x);
  return h;
}

/// Entropy gap log2 n - H(p) in bits, as sum p log2(n p).
inline double entropy_gap_bits(std::span<const double> p) {
  const auto n = static_cast<double>(p.size());
  double gap = 0;
  for (double x : p)
    if (x > 0.0) gap += x * std::log2(n * x);
  return std::max(0.0, gap);
}

inline double imbalance_of_shares(const ShareVector& p) {
  if (p.size() < 2) throw DomainError("imbalance needs at least 2 shares");
  const auto v = p.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) return 0.0;
  return std::min(1.0, entropy_gap_bits(v) / std::log2(static_cast<double>(p.size())));
}

using Grouping = std::vector<std::vector<std::size_t>>;

struct Decomposition {
  double total_gap;                 ///< log2 M - H(p)
  double between_gap;               ///< D(q || m_g / M)
  std::vector<double> within_gaps;  ///< log2 m_g - H(p | g), per group
  double reconstruction;            ///< between + sum_g q_g within_g
};

namespace detail {

inline void check_partition(std::size_t n, const Grouping& groups) {
  std::vector<int> seen(n, 0);
  for (const auto& g : groups) {
    if (g.empty()) throw DomainError("empty group in partition");
    for (std::size_t i : g) {
      if (i >= n) throw DomainError("group index out of range");
      ++seen[i];
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
    throw DomainError("grouping must cover every index exactly once");
  }
}

}  // namespace detail

/// Chain-rule split of the entropy gap into between- and within-group parts.
inline Decomposition decompose(const ShareVector& p, const Grouping& groups) {
  const std::size_t n = p.size();
  detail::check_partition(n, groups);
  Decomposition d{entropy_gap_bits(p.values()), 0.0, {}, 0.0};
  double within_sum = 0;
  for (const auto& g : groups) {
    double mass = 0;
    for (std::size_t i : g) mass += p[i];
    if (!(mass > 0.0)) throw DomainError("group with zero mass");
    const auto size = static_cast<double>(g.size());
    d.between_gap += mass * std::log2(mass * static_cast<double>(n) / size);
    std::vector<double> conditional;
    conditional.reserve(g.size());
    for (std::size_t i : g) conditional.push_back(p[i] / mass);
    const double within = std::log2(size) - entropy_bits(conditional);
    d.within_gaps.push_back(within);
    within_sum += mass * within;
  }
  d.reconstruction = d.between_gap + within_sum;
  return d;
}

struct ReferenceIndices {
  double gini;      ///< sum_ij |x_i - x_j| / (2 n^2 mean)
  double jfi;       ///< (sum x)^2 / (n sum x^2)
  double cv;        ///< population std / mean
  double variance;  ///< population variance
};

/// Classical inequality indices over any nonnegative vector with positive
/// mean (shares or raw scores).
inline ReferenceIndices reference_indices(std::span<const double> x) {
  if (x.empty()) throw DomainError("reference indices need a non-empty vector");
  const auto n = static_cast<double>(x.size());
  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  const double mean = sum / n;
  if (!(mean > 0.0)) throw DomainError("reference indices need a positive mean");
  double sq = 0, var = 0;
  for (double v : x) {
    sq += v * v;
    var += (v - mean) * (v - mean);
  }
  var /= n;
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  // sum_{i,j} |x_i - x_j| = 2 sum_i (2i - n + 1) x_(i) over ascending order.
  double abs_diff = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    abs_diff += (2.0 * static_cast<double>(i) - n + 1.0) * sorted[i];
  }
  abs_diff *= 2.0;
  return {abs_diff / (2.0 * n * n * mean), sum * sum / (n * sq), std::sqrt(var) / mean, var};
}

inline ReferenceIndices reference_indices(const ShareVector& p) {
  return reference_indices(p.values());
}

/// Applies cost -> scale * cost + shift to every class and the matching
/// SLA adjustment (h0 -> scale * h0 + shift, a -> a / scale).
inline std::pair<CostHistogram, SlaPoint> affine_transform(const CostHistogram& h,
                                                           const SlaPoint& sla,
                                                           double shift, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("scale must be > 0");
  std::vector<CostClass> classes;
  classes.reserve(h.size());
  for (const auto& c : h.classes()) {
    const double cost = scale * c.cost + shift;
    if (!(cost > 0.0)) throw DomainError("transformed cost is not positive");
    classes.push_back({cost, c.count});
  }
  const double h0 = scale * sla.h0() + shift;
  if (!(h0 > 0.0)) throw DomainError("transformed threshold is not positive");
  return {CostHistogram::from_classes(std::move(classes)), SlaPoint(sla.a() / scale, h0)};
}

}  // namespace qoescape

#endif  // QOESCAPE_QOE_HPP
