#ifndef QOESCAPE_ASYMPTOTICS_HPP
#define QOESCAPE_ASYMPTOTICS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "histogram.hpp"
#include "qoe.hpp"

namespace qoescape {

// ---------------------------------------------------------------------------
// Small-a law: I(a, h0) ~ k a^2 as a -> 0, independent of h0.

/// k = Var(h) / (8 ln 2 log2 M). The ln 2 comes from expanding the entropy
/// in nats and reporting it in bits.
inline double small_a_coefficient(const CostHistogram& h) {
  const double log2_m = std::log2(static_cast<double>(h.pair_total()));
  return moments(h).variance / (8.0 * std::numbers::ln2 * log2_m);
}

/// The same coefficient without the ln 2 factor, Var(h) / (8 log2 M).
/// Reported alongside for comparison; not used for validation.
inline double small_a_coefficient_without_ln2(const CostHistogram& h) {
  return moments(h).variance / (8.0 * std::log2(static_cast<double>(h.pair_total())));
}

struct SmallAReport {
  double k_theory;
  double k_theory_no_ln2;  ///< ln2-free variant
  double k_fit;
  std::optional<double> ratio;  ///< k_fit / k_theory; empty when k_theory == 0
  double fit_r2;                ///< uncentered, for the through-origin model
  std::vector<double> a_samples;
  double h0_used;
};

/// `count` log-spaced points in [lo, hi].
inline std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  const double l0 = std::log10(lo), l1 = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = std::pow(10.0, l0 + (l1 - l0) * t);
  }
  return out;
}

/// 16 log-spaced strictness values in [1e-3, 1e-2].
inline std::vector<double> default_small_a_samples() { return log_spaced(1e-3, 1e-2, 16); }

/// Least-squares slope of I against a^2 through the origin.
inline SmallAReport fit_small_a_slope(const CostHistogram& h, double h0,
                                      std::span<const double> a_samples) {
  if (a_samples.size() < 3) throw ParameterError("small-a fit needs at least 3 samples");
  double sxy = 0, sxx = 0, syy = 0;
  std::vector<double> x, y;
  for (double a : a_samples) {
    if (!(a > 0.0)) throw ParameterError("small-a samples must be > 0");
    const double xi = a * a;
    const double yi = evaluate(h, SlaPoint(a, h0)).imbalance;
    x.push_back(xi);
    y.push_back(yi);
    sxy += xi * yi;
    sxx += xi * xi;
    syy += yi * yi;
  }
  const double k_fit = sxy / sxx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ss_res += (y[i] - k_fit * x[i]) * (y[i] - k_fit * x[i]);
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;

  SmallAReport r{small_a_coefficient(h), small_a_coefficient_without_ln2(h), k_fit,
                 std::nullopt, r2, {a_samples.begin(), a_samples.end()}, h0};
  if (r.k_theory > 0.0) r.ratio = k_fit / r.k_theory;
  return r;
}

// ---------------------------------------------------------------------------
// Large-a staircase: I -> 1 - log2 K(h0) / log2 M.

struct Plateau {
  double lower;  ///< open interval (lower, upper) of h0
  double upper;
  std::uint64_t k;  ///< satisfied pair count on this step
  double limit_imbalance;
};

struct StaircaseProfile {
  std::vector<double> breakpoints;
  std::vector<Plateau> plateaus;
  std::uint64_t pair_total;
};

namespace detail {

inline double staircase_value(std::uint64_t k, std::uint64_t m) {
  return 1.0 - std::log2(static_cast<double>(k)) / std::log2(static_cast<double>(m));
}

/// K used by the limit: pairs strictly below h0, or the minimum-cost pairs
/// when none are (the limit shares concentrate uniformly on the argmin set).
inline std::uint64_t effective_k(const CostHistogram& h, double h0) {
  const auto k = cumulative_count(h, h0);
  return k == 0 ? h[0].count : k;
}

}  // namespace detail

/// I_inf(h0) for any h0 > 0.
inline double limit_imbalance(const CostHistogram& h, double h0) {
  return detail::staircase_value(detail::effective_k(h, h0), h.pair_total());
}

inline StaircaseProfile staircase(const CostHistogram& h) {
  StaircaseProfile p{{}, {}, h.pair_total()};
  double lower = 0.0;
  std::uint64_t below = 0;
  for (const auto& c : h.classes()) {
    p.breakpoints.push_back(c.cost);
    const auto k = below == 0 ? h[0].count : below;
    p.plateaus.push_back({lower, c.cost, k, detail::staircase_value(k, h.pair_total())});
    lower = c.cost;
    below += c.count;
  }
  p.plateaus.push_back({lower, std::numeric_limits<double>::infinity(), below, 0.0});
  return p;
}

/// Length of the contiguous h0 interval around `breakpoint` on which
/// |I(a, h0) - I_inf(h0)| > eps, scanned at resolution 1e-3 / a between the
/// neighbouring costs.
inline double transition_width(const CostHistogram& h, double a, double breakpoint, double eps) {
  std::size_t idx = h.size();
  for (std::size_t j = 0; j < h.size(); ++j)
    if (h[j].cost == breakpoint) idx = j;
  if (idx == h.size()) throw ParameterError("breakpoint must be one of the histogram costs");
  if (!(a > 0.0)) throw ParameterError("a must be > 0");

  const double below = limit_imbalance(h, breakpoint);
  const double above = limit_imbalance(h, std::nextafter(breakpoint, breakpoint + 1.0));
  const double gap = std::fabs(below - above);
  if (!(eps > 0.0) || !(eps < 0.5 * gap)) {
    throw ParameterError("eps must lie in (0, half the plateau step " + std::to_string(gap) + ")");
  }

  const double prev = idx > 0 ? h[idx - 1].cost : breakpoint - (h.size() > 1 ? h[1].cost - breakpoint : 1.0);
  const double next = idx + 1 < h.size() ? h[idx + 1].cost
                                          : breakpoint + (idx > 0 ? breakpoint - h[idx - 1].cost : 1.0);
  const double lo = std::max(prev, 0.0);
  const double step = 1e-3 / a;
  const auto deviation = [&](double h0) {
    return std::fabs(evaluate(h, SlaPoint(a, h0)).imbalance - limit_imbalance(h, h0));
  };
  double left = breakpoint;
  while (left - step > lo && deviation(left - step) > eps) left -= step;
  double right = breakpoint;
  while (right + step < next && deviation(right + step) > eps) right += step;
  return right - left;
}

}  // namespace qoescape

#endif  // QOESCAPE_ASYMPTOTICS_HPP
