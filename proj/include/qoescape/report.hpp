#ifndef QOESCAPE_REPORT_HPP
#define QOESCAPE_REPORT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "histogram.hpp"
#include "landscape.hpp"
#include "qoe.hpp"
#include "sensitivity.hpp"

namespace qoescape {

inline constexpr std::string_view kToolVersion = "0.3.1";

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Number formatting

/// "%.9g".
inline std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// v rounded to 9 significant digits, so JSON dumps stay short and stable.
inline double round9(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_g9(v).c_str(), nullptr);
}

inline Json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round9(v);
}

inline Json num(const std::optional<double>& v) { return v ? num(*v) : Json(nullptr); }

// ---------------------------------------------------------------------------
// JSON views

inline Json to_json(const CostHistogram& h) {
  Json classes = Json::array();
  for (const auto& c : h.classes()) classes.push_back({{"cost", num(c.cost)}, {"count", c.count}});
  const auto m = moments(h);
  return {{"M", h.pair_total()},
          {"classes", std::move(classes)},
          {"mean", num(m.mean)},
          {"variance", num(m.variance)},
          {"m3", num(m.m3)},
          {"m4", num(m.m4)}};
}

inline Json to_json(const QoeSnapshot& s) {
  Json classes = Json::array();
  for (const auto& r : s.classes) {
    classes.push_back({{"cost", num(r.cost)},
                       {"count", r.count},
                       {"weight", num(r.weight)},
                       {"share", num(r.share)}});
  }
  return {{"a", num(s.sla.a())},
          {"h0", num(s.sla.h0())},
          {"M", s.pair_total},
          {"s_bar", num(s.mean_satisfaction)},
          {"entropy_bits", num(s.entropy_bits)},
          {"imbalance", num(s.imbalance)},
          {"classes", std::move(classes)}};
}

inline Json to_json(const GradientPair& g) {
  return {{"dI_da", num(g.dI_da)},
          {"dI_dh0", num(g.dI_dh0)},
          {"ds_da", num(g.ds_da)},
          {"ds_dh0", num(g.ds_dh0)},
          {"angle_deg", num(g.angle_deg)},
          {"angle_degenerate", !g.angle_deg.has_value()}};
}

inline Json to_json(const HessianI& h) {
  return {{"d2I_aa", num(h.d2_aa)},
          {"d2I_h0h0", num(h.d2_h0h0)},
          {"d2I_ah0", num(h.d2_ah0)},
          {"d2I_h0a", num(h.d2_h0a)},
          {"step_limited", h.step_limited}};
}

inline Json to_json(const std::vector<DiagnosticRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"cost", num(r.cost)},
                   {"count", r.count},
                   {"share", num(r.share)},
                   {"leverage", num(r.leverage)},
                   {"sensitivity", num(r.sensitivity)},
                   {"contribution", num(r.contribution)}});
  }
  return out;
}

inline Json to_json(const SmallAReport& r) {
  Json samples = Json::array();
  for (double a : r.a_samples) samples.push_back(num(a));
  return {{"k_theory", num(r.k_theory)},
          {"k_theory_no_ln2", num(r.k_theory_no_ln2)},
          {"k_fit", num(r.k_fit)},
          {"ratio", num(r.ratio)},
          {"fit_r2", num(r.fit_r2)},
          {"h0_used", num(r.h0_used)},
          {"a_samples", std::move(samples)}};
}

inline Json to_json(const StaircaseProfile& p) {
  Json plateaus = Json::array();
  for (const auto& s : p.plateaus) {
    plateaus.push_back({{"lower", num(s.lower)},
                        {"upper", std::isfinite(s.upper) ? num(s.upper) : Json("inf")},
                        {"K", s.k},
                        {"I_inf", num(s.limit_imbalance)}});
  }
  Json bp = Json::array();
  for (double b : p.breakpoints) bp.push_back(num(b));
  return {{"M", p.pair_total}, {"breakpoints", std::move(bp)}, {"plateaus", std::move(plateaus)}};
}

inline Json to_json(const Axis& ax) {
  return {{"min", num(ax.min)},
          {"max", num(ax.max)},
          {"steps", ax.steps},
          {"spacing", ax.spacing == Spacing::log ? "log" : "linear"}};
}

inline Json to_json(const GridSpec& s) { return {{"a", to_json(s.a_axis)}, {"h0", to_json(s.h0_axis)}}; }

inline Json to_json(const OperatingRegion& r, const GridSpec& window) {
  return {{"i_max", num(r.i_max)},
          {"s_min", num(r.s_min)},
          {"aor_percent", num(r.aor_percent)},
          {"mcr", num(r.mcr)},
          {"mcr_defined", r.mcr.has_value()},
          {"window", to_json(window)},
          {"boundary_cell_count", r.boundary_cells.size()}};
}

/// Reproducibility header shared by every JSON document.
inline Json document(std::string_view command, Json config) {
  return {{"tool_version", kToolVersion}, {"command", command}, {"config", std::move(config)}};
}

// ---------------------------------------------------------------------------
// Grid CSV

inline constexpr std::string_view kGridCsvHeader =
    "a,h0,I,s_bar,dI_da,dI_dh0,ds_da,ds_dh0,d2I_aa,d2I_h0h0,d2I_ah0";

/// a outer, h0 inner; '%.9g'; LF.
inline void write_grid_csv(std::ostream& out, const ScanGrid& g) {
  out << kGridCsvHeader << '\n';
  for (std::size_t i = 0; i < g.a_values.size(); ++i) {
    for (std::size_t j = 0; j < g.h0_values.size(); ++j) {
      out << format_g9(g.a_values[i]) << ',' << format_g9(g.h0_values[j]);
      for (const auto& layer : g.layers) out << ',' << format_g9(layer(i, j));
      out << '\n';
    }
  }
}

namespace detail {

inline Spacing infer_spacing(const std::vector<double>& v) {
  if (v.size() < 3) return Spacing::linear;
  const double d0 = v[1] - v[0];
  for (std::size_t i = 2; i < v.size(); ++i) {
    if (std::fabs((v[i] - v[i - 1]) - d0) > 1e-6 * std::max(1.0, std::fabs(d0))) return Spacing::log;
  }
  return Spacing::linear;
}

}  // namespace detail

/// Inverse of write_grid_csv. Layer values come back at 9 significant digits.
inline ScanGrid read_grid_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty grid CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kGridCsvHeader) throw ParseError(1, "unexpected grid CSV header");

  std::vector<std::array<double, kLayerCount + 2>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, kLayerCount + 2> row{};
    std::size_t field = 0, pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      const std::string token = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (field >= row.size()) throw ParseError(line_no, "too many fields");
      char* end = nullptr;
      row[field] = std::strtod(token.c_str(), &end);
      if (token.empty() || *end != '\0') throw ParseError(line_no, "non-numeric field '" + token + "'");
      ++field;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (field != row.size()) throw ParseError(line_no, "expected " + std::to_string(row.size()) + " fields");
    rows.push_back(row);
  }
  if (rows.empty()) throw ParseError(line_no, "grid CSV has no rows");

  ScanGrid g;
  for (const auto& r : rows) {
    if (r[0] != rows.front()[0]) break;
    g.h0_values.push_back(r[1]);
  }
  const std::size_t cols = g.h0_values.size();
  if (rows.size() % cols != 0) throw ParseError(line_no, "grid CSV is not rectangular");
  const std::size_t nrows = rows.size() / cols;
  for (std::size_t i = 0; i < nrows; ++i) g.a_values.push_back(rows[i * cols][0]);
  for (auto& layer : g.layers) layer = Layer(nrows, cols);
  for (std::size_t i = 0; i < nrows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const auto& r = rows[i * cols + j];
      if (r[0] != g.a_values[i] || r[1] != g.h0_values[j]) {
        throw ParseError(i * cols + j + 2, "grid CSV rows out of order");
      }
      for (std::size_t l = 0; l < kLayerCount; ++l) g.layers[l](i, j) = r[l + 2];
    }
  }
  g.spec = {{g.a_values.front(), g.a_values.back(), nrows, detail::infer_spacing(g.a_values)},
            {g.h0_values.front(), g.h0_values.back(), cols, Spacing::linear}};
  return g;
}

// ---------------------------------------------------------------------------
// PGM heatmaps

enum class Scaling { minmax, absmax };

struct PgmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  ///< row-major, top row first
  double min = 0;
  double max = 0;
  double absmax = 0;
  Scaling scaling = Scaling::minmax;
  bool constant = false;  ///< constant input, rendered mid-gray
};

/// Grey levels for `values` laid out as rows x cols, row 0 at the top.
/// minmax: floor((v - min) / (max - min) * 255); absmax: floor(|v| / max|v| * 255).
inline PgmImage render_pgm(const Layer& values, Scaling scaling) {
  if (values.size() == 0) throw ParameterError("cannot render an empty grid");
  PgmImage img;
  img.width = values.cols();
  img.height = values.rows();
  img.scaling = scaling;
  const auto flat = values.flat();
  const auto [lo, hi] = std::minmax_element(flat.begin(), flat.end());
  img.min = *lo;
  img.max = *hi;
  for (double v : flat) img.absmax = std::max(img.absmax, std::fabs(v));
  const double span = scaling == Scaling::minmax ? img.max - img.min : img.absmax;
  img.constant = !(span > 0.0);
  img.pixels.reserve(flat.size());
  for (double v : flat) {
    if (img.constant) {
      img.pixels.push_back(127);
      continue;
    }
    const double t = scaling == Scaling::minmax ? (v - img.min) / span : std::fabs(v) / span;
    img.pixels.push_back(static_cast<std::uint8_t>(std::clamp(std::floor(t * 255.0), 0.0, 255.0)));
  }
  return img;
}

/// Heatmap orientation: image rows are h0 descending, columns a ascending.
inline PgmImage render_heatmap(const Layer& layer, Scaling scaling) {
  Layer t(layer.cols(), layer.rows());
  for (std::size_t i = 0; i < layer.rows(); ++i)
    for (std::size_t j = 0; j < layer.cols(); ++j) t(layer.cols() - 1 - j, i) = layer(i, j);
  return render_pgm(t, scaling);
}

inline void write_pgm(std::ostream& out, const PgmImage& img) {
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
}

inline Json pgm_sidecar(const PgmImage& img, const GridSpec& window, std::string_view layer) {
  return {{"tool_version", kToolVersion},
          {"layer", layer},
          {"min", num(img.min)},
          {"max", num(img.max)},
          {"absmax", num(img.absmax)},
          {"scaling", img.scaling == Scaling::minmax ? "minmax" : "absmax"},
          {"constant", img.constant},
          {"orientation", "rows=h0 descending, cols=a ascending"},
          {"window", to_json(window)}};
}

// ---------------------------------------------------------------------------
// Multi-topology comparison

struct ComparisonRow {
  std::string name;
  std::size_t n;
  double var_h;
  double aor_percent;
  std::optional<double> mcr;
};

struct NamedHistogram {
  std::string name;
  std::size_t node_count;
  CostHistogram histogram;
};

/// Window shared by every compared topology: default a axis, h0 up to the
/// largest max cost + 0.5.
inline GridSpec comparison_window(const std::vector<NamedHistogram>& inputs) {
  double max_cost = 0;
  for (const auto& in : inputs) max_cost = std::max(max_cost, in.histogram.max_cost());
  return default_grid_spec(max_cost);
}

inline std::vector<ComparisonRow> compare(const std::vector<NamedHistogram>& inputs, double i_max,
                                          double s_min, const GridSpec& window,
                                          unsigned threads = 0) {
  if (inputs.size() < 2) throw UsageError("compare needs at least 2 topologies");
  std::vector<ComparisonRow> rows;
  for (const auto& in : inputs) {
    try {
      const auto grid = scan(in.histogram, window, threads);
      const auto region = operating_region(grid, i_max, s_min);
      rows.push_back({in.name, in.node_count, moments(in.histogram).variance, region.aor_percent,
                      region.mcr});
    } catch (const Error& e) {
      throw Error(in.name + ": " + e.what());
    }
  }
  return rows;
}

inline std::string comparison_table(const std::vector<ComparisonRow>& rows) {
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s %8s %14s %10s %14s\n", static_cast<int>(width), "topology", "N",
                "var_h", "aor_%", "mcr");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %8zu %14.6g %10.4f %14s\n", static_cast<int>(width),
                  r.name.c_str(), r.n, r.var_h, r.aor_percent,
                  r.mcr ? format_g9(*r.mcr).c_str() : "undefined");
    out << buf;
  }
  return out.str();
}

inline Json to_json(const std::vector<ComparisonRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"name", r.name},
                   {"N", r.n},
                   {"var_h", num(r.var_h)},
                   {"aor_percent", num(r.aor_percent)},
                   {"mcr", num(r.mcr)}});
  }
  return out;
}

}  // namespace qoescape

#endif  // QOESCAPE_REPORT_HPP
