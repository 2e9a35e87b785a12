#ifndef QOESCAPE_VALIDATION_HPP
#define QOESCAPE_VALIDATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "histogram.hpp"
#include "qoe.hpp"
#include "random.hpp"
#include "report.hpp"
#include "sensitivity.hpp"

namespace qoescape {

struct Check {
  std::string name;
  double value;
  double threshold;
  std::string relation;  ///< how value is compared with threshold, e.g. "<=" or "in"
  bool pass;
};

struct ValidationReport {
  std::string mode;
  std::vector<Check> checks;
  Json details = Json::object();

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

inline Json to_json(const ValidationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"value", num(c.value)},
                      {"threshold", num(c.threshold)},
                      {"relation", c.relation},
                      {"pass", c.pass}});
  }
  return {{"mode", r.mode}, {"pass", r.pass()}, {"checks", std::move(checks)}, {"details", r.details}};
}

// ---------------------------------------------------------------------------
// small-a

/// Ratio k_fit / k_theory at h0 = mean cost, and agreement of two fits at
/// mean -/+ 0.75.
inline ValidationReport validate_small_a(const CostHistogram& h) {
  ValidationReport r{"small-a", {}, {}};
  const auto samples = default_small_a_samples();
  const double mean = moments(h).mean;
  const auto main = fit_small_a_slope(h, mean, samples);
  const auto lo = fit_small_a_slope(h, mean - 0.75, samples);
  const auto hi = fit_small_a_slope(h, mean + 0.75, samples);
  if (main.ratio) {
    r.checks.push_back({"ratio k_fit/k_theory", *main.ratio, 0.02, "|x-1| <=",
                        std::fabs(*main.ratio - 1.0) <= 0.02});
    const double spread = std::fabs(lo.k_fit - hi.k_fit) / std::max(std::fabs(lo.k_fit), std::fabs(hi.k_fit));
    r.checks.push_back({"h0 independence |dk|/k", spread, 0.02, "<=", spread <= 0.02});
  } else {
    r.checks.push_back({"k_fit with zero variance", main.k_fit, 0.0, "==", main.k_fit == 0.0});
  }
  r.details = {{"fit", to_json(main)}, {"fit_low_h0", to_json(lo)}, {"fit_high_h0", to_json(hi)}};
  return r;
}

// ---------------------------------------------------------------------------
// large-a

/// Plateau midpoints at least 0.5 away from every cost: midpoints of
/// consecutive costs at least 1 apart, and max cost + 0.5.
inline std::vector<double> plateau_midpoints(const CostHistogram& h) {
  std::vector<double> out;
  for (std::size_t j = 0; j + 1 < h.size(); ++j) {
    if (h[j + 1].cost - h[j].cost >= 1.0) out.push_back(0.5 * (h[j].cost + h[j + 1].cost));
  }
  out.push_back(h.max_cost() + 0.5);
  return out;
}

/// |I(a, h0) - I_inf(h0)| < 0.02 at every midpoint for a = `a`, and the
/// deviation at 2a strictly below it (or both exactly zero).
inline ValidationReport validate_large_a(const CostHistogram& h, double a = 10.0) {
  ValidationReport r{"large-a", {}, {}};
  double worst = 0;
  bool shrinking = true;
  Json points = Json::array();
  for (double h0 : plateau_midpoints(h)) {
    const double limit = limit_imbalance(h, h0);
    const double d1 = std::fabs(evaluate(h, SlaPoint(a, h0)).imbalance - limit);
    const double d2 = std::fabs(evaluate(h, SlaPoint(2 * a, h0)).imbalance - limit);
    worst = std::max(worst, d1);
    shrinking = shrinking && (d2 < d1 || (d1 == 0.0 && d2 == 0.0));
    points.push_back({{"h0", num(h0)}, {"I_inf", num(limit)}, {"dev_a", num(d1)}, {"dev_2a", num(d2)}});
  }
  r.checks.push_back({"max midpoint deviation", worst, 0.02, "<", worst < 0.02});
  r.checks.push_back({"deviation shrinks at 2a", shrinking ? 1.0 : 0.0, 1.0, "==", shrinking});
  r.details = {{"a", num(a)}, {"midpoints", std::move(points)}, {"staircase", to_json(staircase(h))}};
  return r;
}

// ---------------------------------------------------------------------------
// gradient

/// |analytic - fd| / max(|analytic|, floor).
inline double gradient_error(double analytic, double fd, double floor = 1e-10) {
  return std::fabs(analytic - fd) / std::max(std::fabs(analytic), floor);
}

struct GradientSample {
  double a;
  double h0;
  double max_error;      ///< over the four components
  double diagnose_gap;   ///< max over a, h0 of |sum contributions - dI/dtheta|
};

inline GradientSample check_gradient_at(const CostHistogram& h, const SlaPoint& sla) {
  const auto an = gradient(h, sla);
  const auto fd = gradient_fd(h, sla, 1e-5);
  const double err = std::max({gradient_error(an.dI_da, fd.dI_da), gradient_error(an.dI_dh0, fd.dI_dh0),
                               gradient_error(an.ds_da, fd.ds_da), gradient_error(an.ds_dh0, fd.ds_dh0)});
  double gap = 0;
  for (auto [param, target] : {std::pair{Parameter::a, an.dI_da}, std::pair{Parameter::h0, an.dI_dh0}}) {
    double sum = 0;
    for (const auto& row : diagnose(h, sla, param)) sum += row.contribution;
    gap = std::max(gap, std::fabs(sum - target));
  }
  return {sla.a(), sla.h0(), err, gap};
}

/// Random (a, h0) with a in [0.2, 8], h0 in [0.5, max cost].
inline std::vector<GradientSample> sample_gradient_errors(const CostHistogram& h, std::size_t samples,
                                                          std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<GradientSample> out;
  const double h0_hi = std::max(0.5 + 1e-3, h.max_cost());
  for (std::size_t i = 0; i < samples; ++i) {
    const double a = rng.uniform(0.2, 8.0);
    const double h0 = rng.uniform(0.5, h0_hi);
    out.push_back(check_gradient_at(h, SlaPoint(a, h0)));
  }
  return out;
}

inline ValidationReport validate_gradient(const CostHistogram& h, std::size_t samples = 200,
                                          std::uint64_t seed = 1) {
  ValidationReport r{"gradient", {}, {}};
  const auto rows = sample_gradient_errors(h, samples, seed);
  double err = 0, gap = 0;
  const GradientSample* worst = nullptr;
  for (const auto& s : rows) {
    if (!worst || s.max_error > err) worst = &s;
    err = std::max(err, s.max_error);
    gap = std::max(gap, s.diagnose_gap);
  }
  r.checks.push_back({"max relative error vs FD", err, 1e-5, "<=", err <= 1e-5});
  r.checks.push_back({"diagnostic sum gap", gap, 1e-10, "<=", gap <= 1e-10});
  r.details = {{"samples", samples}, {"seed", seed}, {"fd_step", 1e-5}, {"abs_floor", 1e-10}};
  if (worst) r.details["worst"] = {{"a", num(worst->a)}, {"h0", num(worst->h0)}};
  return r;
}

// ---------------------------------------------------------------------------
// Axioms on explicit share vectors

namespace detail {

inline std::vector<double> random_scores(SplitMix64& rng, std::size_t n) {
  std::vector<double> s(n);
  for (double& x : s) x = rng.uniform(1e-3, 1.0);
  return s;
}

inline ShareVector random_shares(SplitMix64& rng, std::size_t n) {
  const auto s = random_scores(rng, n);
  return ShareVector::from_scores(s);
}

/// Random partition of 0..n-1 into between 1 and min(n, 4) non-empty groups.
inline Grouping random_partition(SplitMix64& rng, std::size_t n) {
  const std::size_t groups = 1 + rng.below(std::min<std::size_t>(n, 4));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  Grouping g(groups);
  for (std::size_t i = 0; i < n; ++i) g[i < groups ? i : rng.below(groups)].push_back(idx[i]);
  return g;
}

}  // namespace detail

/// A1-A5 over `trials` random share vectors.
inline ValidationReport validate_axioms(std::size_t trials = 1000, std::uint64_t seed = 7) {
  ValidationReport r{"axioms", {}, {}};
  SplitMix64 rng(seed);
  double a1 = 0, a2 = 0, a4 = 0, a5 = 0;
  bool a3 = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 2 + rng.below(31);
    const auto scores = detail::random_scores(rng, n);
    const auto p = ShareVector::from_scores(scores);
    const double ip = imbalance_of_shares(p);

    std::vector<double> perm(p.values().begin(), p.values().end());
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    a1 = std::max(a1, std::fabs(imbalance_of_shares(ShareVector(perm)) - ip));

    for (double lambda : {1e-6, 1.0, 1e6}) {
      std::vector<double> scaled(scores);
      for (double& x : scaled) x *= lambda;
      a2 = std::max(a2, std::fabs(imbalance_of_shares(ShareVector::from_scores(scaled)) - ip));
    }

    std::vector<double> uniform(n, 1.0 / static_cast<double>(n)), one_hot(n, 0.0);
    one_hot[rng.below(n)] = 1.0;
    a3 = a3 && imbalance_of_shares(ShareVector::from_scores(uniform)) == 0.0 &&
         imbalance_of_shares(ShareVector(one_hot)) == 1.0;

    // Rank-preserving transfer from a richer entry i to a poorer entry j.
    std::vector<double> v(p.values().begin(), p.values().end());
    const std::size_t i = rng.below(n);
    std::size_t j = rng.below(n);
    if (v[i] != v[j]) {
      const std::size_t rich = v[i] > v[j] ? i : j, poor = v[i] > v[j] ? j : i;
      double room = (v[rich] - v[poor]) / 2.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (v[k] < v[rich] && v[k] > v[poor]) room = std::min(room, std::min(v[rich] - v[k], v[k] - v[poor]));
      }
      const double delta = rng.uniform(0.0, 1.0) * room;
      v[rich] -= delta;
      v[poor] += delta;
      const auto moved = ShareVector::from_scores(v);
      a4 = std::max(a4, imbalance_of_shares(moved) - ip);
    }

    const auto d = decompose(p, detail::random_partition(rng, n));
    a5 = std::max(a5, std::fabs(d.reconstruction - d.total_gap));
  }
  r.checks.push_back({"A1 anonymity", a1, 1e-12, "<=", a1 <= 1e-12});
  r.checks.push_back({"A2 scale invariance", a2, 1e-12, "<=", a2 <= 1e-12});
  r.checks.push_back({"A3 calibration exact", a3 ? 1.0 : 0.0, 1.0, "==", a3});
  r.checks.push_back({"A4 transfer increase", a4, 1e-12, "<=", a4 <= 1e-12});
  r.checks.push_back({"A5 decomposition gap", a5, 1e-9, "<=", a5 <= 1e-9});
  r.details = {{"trials", trials}, {"seed", seed}};
  return r;
}

// ---------------------------------------------------------------------------
// Counterexamples for the classical indices

enum class ReferenceIndex { gini, jfi, cv, variance };

inline std::string_view index_name(ReferenceIndex i) {
  switch (i) {
    case ReferenceIndex::gini: return "gini";
    case ReferenceIndex::jfi: return "jfi";
    case ReferenceIndex::cv: return "cv";
    case ReferenceIndex::variance: return "variance";
  }
  return "?";
}

/// Inequality orientation: 0 for a uniform vector (JFI enters as 1 - JFI).
inline double inequality(ReferenceIndex idx, std::span<const double> x) {
  const auto r = reference_indices(x);
  switch (idx) {
    case ReferenceIndex::gini: return r.gini;
    case ReferenceIndex::jfi: return 1.0 - r.jfi;
    case ReferenceIndex::cv: return r.cv;
    case ReferenceIndex::variance: return r.variance;
  }
  return 0.0;
}

/// F(x) against F(group-mean smoothed x) + sum_g q_g F(x_g / q_g).
inline std::pair<double, double> analogous_decomposition(ReferenceIndex idx, const ShareVector& p,
                                                         const Grouping& groups) {
  detail::check_partition(p.size(), groups);
  std::vector<double> smoothed(p.size());
  double within = 0;
  for (const auto& g : groups) {
    double mass = 0;
    for (std::size_t i : g) mass += p[i];
    if (!(mass > 0.0)) throw DomainError("group with zero mass");
    std::vector<double> part;
    for (std::size_t i : g) {
      smoothed[i] = mass / static_cast<double>(g.size());
      part.push_back(p[i] / mass);
    }
    within += mass * inequality(idx, part);
  }
  return {inequality(idx, p.values()), inequality(idx, smoothed) + within};
}

struct Counterexample {
  ReferenceIndex index;
  std::string axiom;      ///< "A2" or "A5"
  std::vector<double> values;  ///< shares (A5) or raw scores (A2)
  Grouping grouping;      ///< A5 only
  double lambda = 1.0;    ///< A2 only
  double lhs;             ///< F(p), or F(s) for A2
  double rhs;             ///< reconstruction, or F(lambda s)
};

/// |lhs - rhs| > 1e-6 for the stored instance.
inline bool still_violates(const Counterexample& c) {
  if (c.axiom == "A2") {
    std::vector<double> scaled(c.values);
    for (double& x : scaled) x *= c.lambda;
    return std::fabs(inequality(c.index, c.values) - inequality(c.index, scaled)) > 1e-6;
  }
  const auto [lhs, rhs] = analogous_decomposition(c.index, ShareVector(c.values), c.grouping);
  return std::fabs(lhs - rhs) > 1e-6;
}

/// Randomized search for the first violation of `axiom` by `idx`.
inline std::optional<Counterexample> find_counterexample(ReferenceIndex idx, std::string_view axiom,
                                                         std::uint64_t seed, std::size_t attempts = 10000) {
  SplitMix64 rng(seed);
  for (std::size_t t = 0; t < attempts; ++t) {
    const std::size_t n = 3 + rng.below(6);
    if (axiom == "A2") {
      auto scores = detail::random_scores(rng, n);
      const double lambda = std::pow(10.0, rng.uniform(-3.0, 3.0));
      std::vector<double> scaled(scores);
      for (double& x : scaled) x *= lambda;
      const double lhs = inequality(idx, scores), rhs = inequality(idx, scaled);
      if (std::fabs(lhs - rhs) > 1e-6) return Counterexample{idx, "A2", scores, {}, lambda, lhs, rhs};
    } else {
      const auto p = detail::random_shares(rng, n);
      auto groups = detail::random_partition(rng, n);
      const auto [lhs, rhs] = analogous_decomposition(idx, p, groups);
      if (std::fabs(lhs - rhs) > 1e-6) {
        return Counterexample{idx, "A5", {p.values().begin(), p.values().end()}, std::move(groups), 1.0, lhs, rhs};
      }
    }
  }
  return std::nullopt;
}

inline Json to_json(const Counterexample& c) {
  Json values = Json::array();
  for (double v : c.values) values.push_back(v);  // full precision: shares must still sum to 1
  return {{"index", index_name(c.index)},
          {"axiom", c.axiom},
          {"values", std::move(values)},
          {"grouping", c.grouping},
          {"lambda", c.lambda},
          {"lhs", c.lhs},
          {"rhs", c.rhs}};
}

inline Counterexample counterexample_from_json(const Json& j) {
  Counterexample c{};
  const auto name = j.at("index").get<std::string>();
  bool known = false;
  for (auto idx : {ReferenceIndex::gini, ReferenceIndex::jfi, ReferenceIndex::cv, ReferenceIndex::variance}) {
    if (index_name(idx) == name) {
      c.index = idx;
      known = true;
    }
  }
  if (!known) throw ParameterError("unknown index '" + name + "'");
  c.axiom = j.at("axiom").get<std::string>();
  c.values = j.at("values").get<std::vector<double>>();
  c.grouping = j.at("grouping").get<Grouping>();
  c.lambda = j.at("lambda").get<double>();
  c.lhs = j.at("lhs").get<double>();
  c.rhs = j.at("rhs").get<double>();
  return c;
}

/// The failing cells: Gini, JFI and CV on A5, variance on A2 and A5.
inline std::vector<std::pair<ReferenceIndex, std::string_view>> counterexample_cells() {
  return {{ReferenceIndex::gini, "A5"},
          {ReferenceIndex::jfi, "A5"},
          {ReferenceIndex::cv, "A5"},
          {ReferenceIndex::variance, "A2"},
          {ReferenceIndex::variance, "A5"}};
}

}  // namespace qoescape

#endif  // QOESCAPE_VALIDATION_HPP
