#ifndef QOESCAPE_SENSITIVITY_HPP
#define QOESCAPE_SENSITIVITY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "histogram.hpp"
#include "qoe.hpp"

namespace qoescape {

enum class Parameter { a, h0 };

struct GradientPair {
  double dI_da;
  double dI_dh0;
  double ds_da;
  double ds_dh0;
  /// Angle between grad I and grad s_bar in degrees; empty when either
  /// gradient norm is <= 1e-14.
  std::optional<double> angle_deg;
};

struct HessianI {
  double d2_aa;
  double d2_h0h0;
  double d2_ah0;  ///< d/dh0 of dI/da
  double d2_h0a;  ///< d/da of dI/dh0
  /// Some cost class lies within 2 steps of h0: the stencil straddles a
  /// staircase riser and the estimate is step-limited.
  bool step_limited;
};

struct DiagnosticRow {
  double cost;
  std::uint64_t count;
  double share;
  double leverage;      ///< 1 + ln p
  double sensitivity;   ///< g for the chosen parameter
  double contribution;  ///< count p leverage (g - E_p[g]) / (ln 2 log2 M)
};

namespace detail {

inline double angle_between(double x1, double y1, double x2, double y2) {
  const double n1 = std::hypot(x1, y1);
  const double n2 = std::hypot(x2, y2);
  if (n1 <= 1e-14 || n2 <= 1e-14) return std::numeric_limits<double>::quiet_NaN();
  const double c = std::clamp((x1 * x2 + y1 * y2) / (n1 * n2), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

inline std::optional<double> optional_angle(double x1, double y1, double x2, double y2) {
  const double deg = angle_between(x1, y1, x2, y2);
  if (std::isnan(deg)) return std::nullopt;
  return deg;
}

/// Sensitivity term g with dw/dtheta = w g.
inline double sensitivity_term(Parameter param, double cost, double one_minus_w,
                               const SlaPoint& sla) {
  return param == Parameter::a ? -(cost - sla.h0()) * one_minus_w : sla.a() * one_minus_w;
}

inline double share_mean(const CostHistogram& h, const ClassTerms& t,
                         const std::vector<double>& g) {
  if (h.size() == 1) return g[0];
  double mean = 0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    mean += static_cast<double>(h[j].count) * t.share[j] * g[j];
  }
  return mean;
}

}  // namespace detail

/// Analytic gradient: dI/dtheta = Cov_p(1 + ln p, g) / (ln 2 log2 M), and
/// ds_bar/dtheta = (1/M) sum count w g.
///
/// The leverage is shifted to ln(M p) before the covariance is taken; a
/// constant shift leaves the covariance unchanged and avoids cancellation
/// when p is near uniform.
inline GradientPair gradient(const CostHistogram& h, const SlaPoint& sla) {
  const auto t = detail::class_terms(h, sla);
  const auto m = static_cast<double>(h.pair_total());
  const double prefactor = 1.0 / (std::numbers::ln2 * std::log2(m));

  double out[2][2] = {};
  for (auto param : {Parameter::a, Parameter::h0}) {
    std::vector<double> g(h.size());
    for (std::size_t j = 0; j < h.size(); ++j) {
      g[j] = detail::sensitivity_term(param, h[j].cost, t.one_minus_weight[j], sla);
    }
    const double mean_g = detail::share_mean(h, t, g);
    double cov = 0, ds = 0;
    for (std::size_t j = 0; j < h.size(); ++j) {
      const auto n = static_cast<double>(h[j].count);
      cov += n * t.share[j] * t.log_ratio[j] * (g[j] - mean_g);
      ds += n * t.weight[j] * g[j];
    }
    const auto i = static_cast<std::size_t>(param);
    out[i][0] = prefactor * cov;
    out[i][1] = ds / m;
  }
  return {out[0][0], out[1][0], out[0][1], out[1][1],
          detail::optional_angle(out[0][0], out[1][0], out[0][1], out[1][1])};
}

namespace detail {

inline void check_stencil(const SlaPoint& sla, double step_a, double step_h0) {
  if (!(step_a > 0.0) || !(step_h0 > 0.0)) throw ParameterError("step must be > 0");
  if (sla.a() - step_a <= 0.0 || sla.h0() - step_h0 <= 0.0) {
    throw StepTooLargeError("finite-difference stencil leaves the domain a > 0, h0 > 0");
  }
}

}  // namespace detail

/// Central differences of evaluate()'s I and s_bar. Oracle for gradient().
inline GradientPair gradient_fd(const CostHistogram& h, const SlaPoint& sla, double step) {
  detail::check_stencil(sla, step, step);
  const auto at = [&](double a, double h0) { return evaluate(h, SlaPoint(a, h0)); };
  const auto ap = at(sla.a() + step, sla.h0());
  const auto am = at(sla.a() - step, sla.h0());
  const auto hp = at(sla.a(), sla.h0() + step);
  const auto hm = at(sla.a(), sla.h0() - step);
  const double inv = 1.0 / (2.0 * step);
  GradientPair gp{(ap.imbalance - am.imbalance) * inv, (hp.imbalance - hm.imbalance) * inv,
                  (ap.mean_satisfaction - am.mean_satisfaction) * inv,
                  (hp.mean_satisfaction - hm.mean_satisfaction) * inv, std::nullopt};
  gp.angle_deg = detail::optional_angle(gp.dI_da, gp.dI_dh0, gp.ds_da, gp.ds_dh0);
  return gp;
}

/// Hessian of I by central differences of the analytic gradient, with
/// separate steps along a and h0.
inline HessianI hessian(const CostHistogram& h, const SlaPoint& sla, double step_a,
                        double step_h0) {
  detail::check_stencil(sla, step_a, step_h0);
  const auto ap = gradient(h, SlaPoint(sla.a() + step_a, sla.h0()));
  const auto am = gradient(h, SlaPoint(sla.a() - step_a, sla.h0()));
  const auto hp = gradient(h, SlaPoint(sla.a(), sla.h0() + step_h0));
  const auto hm = gradient(h, SlaPoint(sla.a(), sla.h0() - step_h0));
  bool limited = false;
  for (const auto& c : h.classes()) {
    if (std::fabs(c.cost - sla.h0()) < 2.0 * step_h0) limited = true;
  }
  return {(ap.dI_da - am.dI_da) / (2.0 * step_a), (hp.dI_dh0 - hm.dI_dh0) / (2.0 * step_h0),
          (hp.dI_da - hm.dI_da) / (2.0 * step_h0), (ap.dI_dh0 - am.dI_dh0) / (2.0 * step_a),
          limited};
}

inline HessianI hessian(const CostHistogram& h, const SlaPoint& sla, double step) {
  return hessian(h, sla, step, step);
}

/// Default steps: max(1e-4, 1e-4 |theta|) per axis.
inline HessianI hessian(const CostHistogram& h, const SlaPoint& sla) {
  return hessian(h, sla, std::max(1e-4, 1e-4 * sla.a()), std::max(1e-4, 1e-4 * sla.h0()));
}

/// Raw covariance Cov_p(1 + ln p, g) for one parameter, using the unshifted
/// leverage. Same quantity as the gradient numerator, separate code path.
inline double leverage_covariance(const CostHistogram& h, const SlaPoint& sla, Parameter param) {
  const auto t = detail::class_terms(h, sla);
  std::vector<double> g(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) {
    g[j] = detail::sensitivity_term(param, h[j].cost, t.one_minus_weight[j], sla);
  }
  const double mean_g = detail::share_mean(h, t, g);
  double cov = 0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    cov += static_cast<double>(h[j].count) * t.share[j] * (1.0 + t.log_share[j]) * (g[j] - mean_g);
  }
  return cov;
}

/// Per-class split of dI/dparam, largest |contribution| first.
inline std::vector<DiagnosticRow> diagnose(const CostHistogram& h, const SlaPoint& sla,
                                           Parameter param) {
  const auto t = detail::class_terms(h, sla);
  const double prefactor =
      1.0 / (std::numbers::ln2 * std::log2(static_cast<double>(h.pair_total())));
  std::vector<double> g(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) {
    g[j] = detail::sensitivity_term(param, h[j].cost, t.one_minus_weight[j], sla);
  }
  const double mean_g = detail::share_mean(h, t, g);
  std::vector<DiagnosticRow> rows;
  rows.reserve(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double leverage = 1.0 + t.log_share[j];
    const double contribution = static_cast<double>(h[j].count) * t.share[j] * leverage *
                                (g[j] - mean_g) * prefactor;
    rows.push_back({h[j].cost, h[j].count, t.share[j], leverage, g[j], contribution});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const DiagnosticRow& x, const DiagnosticRow& y) {
    return std::fabs(x.contribution) > std::fabs(y.contribution);
  });
  return rows;
}

}  // namespace qoescape

#endif  // QOESCAPE_SENSITIVITY_HPP
