#ifndef QOESCAPE_LANDSCAPE_HPP
#define QOESCAPE_LANDSCAPE_HPP

#include <algorithm>
#include <span>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "histogram.hpp"
#include "qoe.hpp"
#include "sensitivity.hpp"

namespace qoescape {

enum class Spacing { linear, log };

struct Axis {
  double min;
  double max;
  std::size_t steps;
  Spacing spacing = Spacing::linear;

  std::vector<double> values() const {
    if (spacing == Spacing::log) return log_spaced(min, max, steps);
    std::vector<double> out(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      out[i] = min + (max - min) * static_cast<double>(i) / static_cast<double>(steps - 1);
    }
    return out;
  }
};

struct GridSpec {
  Axis a_axis;
  Axis h0_axis;

  void validate() const {
    for (const Axis* ax : {&a_axis, &h0_axis}) {
      if (!(ax->min < ax->max)) throw ParameterError("axis min must be < max");
      if (ax->steps < 2) throw ParameterError("axis needs at least 2 steps");
      if (!(ax->min > 0.0)) throw ParameterError("axis min must be > 0");
    }
    if (h0_axis.spacing != Spacing::linear) throw ParameterError("h0 axis must be linear");
  }
};

/// a: 64 log-spaced in [0.05, 20]; h0: 256 linear in [0.5, max cost + 0.5].
inline GridSpec default_grid_spec(double max_cost) {
  return {{0.05, 20.0, 64, Spacing::log}, {0.5, max_cost + 0.5, 256, Spacing::linear}};
}

inline GridSpec default_grid_spec(const CostHistogram& h) { return default_grid_spec(h.max_cost()); }

/// Dense rows x cols array; row = a index, col = h0 index.
template <typename T>
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const T> flat() const noexcept { return data_; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Layer = Grid2D<double>;
using Mask = Grid2D<std::uint8_t>;

enum class LayerId : std::size_t {
  imbalance, s_bar, dI_da, dI_dh0, ds_da, ds_dh0, d2I_aa, d2I_h0h0, d2I_ah0
};

inline constexpr std::size_t kLayerCount = 9;
inline constexpr std::array<std::string_view, kLayerCount> kLayerNames = {
    "I", "s_bar", "dI_da", "dI_dh0", "ds_da", "ds_dh0", "d2I_aa", "d2I_h0h0", "d2I_ah0"};

struct ScanGrid {
  GridSpec spec;
  std::vector<double> a_values;
  std::vector<double> h0_values;
  std::array<Layer, kLayerCount> layers;

  Layer& operator[](LayerId id) { return layers[static_cast<std::size_t>(id)]; }
  const Layer& operator[](LayerId id) const { return layers[static_cast<std::size_t>(id)]; }
};

/// Metrics, analytic gradient and FD-of-gradient Hessian at every cell.
///
/// Rows of the grid are split across `threads` workers (0 = hardware
/// concurrency); every cell is computed independently so the layers do not
/// depend on the schedule.
inline ScanGrid scan(const CostHistogram& h, const GridSpec& spec, unsigned threads = 0) {
  spec.validate();
  ScanGrid g{spec, spec.a_axis.values(), spec.h0_axis.values(), {}};
  const std::size_t rows = g.a_values.size(), cols = g.h0_values.size();
  for (auto& layer : g.layers) layer = Layer(rows, cols);

  auto fill_row = [&](std::size_t i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const SlaPoint sla(g.a_values[i], g.h0_values[j]);
      const auto snap = evaluate(h, sla);
      const auto grad = gradient(h, sla);
      const auto hess = hessian(h, sla);
      g[LayerId::imbalance](i, j) = snap.imbalance;
      g[LayerId::s_bar](i, j) = snap.mean_satisfaction;
      g[LayerId::dI_da](i, j) = grad.dI_da;
      g[LayerId::dI_dh0](i, j) = grad.dI_dh0;
      g[LayerId::ds_da](i, j) = grad.ds_da;
      g[LayerId::ds_dh0](i, j) = grad.ds_dh0;
      g[LayerId::d2I_aa](i, j) = hess.d2_aa;
      g[LayerId::d2I_h0h0](i, j) = hess.d2_h0h0;
      g[LayerId::d2I_ah0](i, j) = hess.d2_ah0;
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, rows));
  if (threads <= 1) {
    for (std::size_t i = 0; i < rows; ++i) fill_row(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < rows; i += threads) fill_row(i);
      });
    }
  }
  return g;
}

/// Linear-interpolation percentile (q in [0, 100]) of a sample.
inline double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

struct RidgeMasks {
  Mask ridge;
  Mask belt;
};

/// Ridge: |d2I/dh0^2| above the q-th percentile. Belt: below the
/// (100 - q)-th percentile.
inline RidgeMasks detect_ridges(const ScanGrid& g, double q) {
  if (!(q >= 50.0 && q < 100.0)) throw ParameterError("percentile must lie in [50, 100)");
  const auto& curv = g[LayerId::d2I_h0h0];
  std::vector<double> mag(curv.flat().begin(), curv.flat().end());
  for (double& v : mag) v = std::fabs(v);
  RidgeMasks m{Mask(curv.rows(), curv.cols(), 0), Mask(curv.rows(), curv.cols(), 0)};
  if (std::all_of(mag.begin(), mag.end(), [](double v) { return v == 0.0; })) {
    m.belt = Mask(curv.rows(), curv.cols(), 1);
    return m;
  }
  const double hi = percentile(mag, q);
  const double lo = percentile(mag, 100.0 - q);
  for (std::size_t i = 0; i < curv.rows(); ++i) {
    for (std::size_t j = 0; j < curv.cols(); ++j) {
      const double v = std::fabs(curv(i, j));
      m.ridge(i, j) = v > hi;
      m.belt(i, j) = v < lo;
    }
  }
  return m;
}

struct OperatingRegion {
  Mask mask;
  double i_max;
  double s_min;
  double aor_percent;
  std::vector<std::pair<std::size_t, std::size_t>> boundary_cells;
  std::optional<double> mcr;  ///< empty when the region is empty
  std::optional<std::pair<std::size_t, std::size_t>> mcr_cell;
};

/// Cells with I <= i_max and s_bar >= s_min; AoR by cell counting; MCR as the
/// largest |d2I/dh0^2| over boundary cells (masked cells with an unmasked
/// 4-neighbour, or on the grid border).
inline OperatingRegion operating_region(const ScanGrid& g, double i_max, double s_min) {
  if (!(i_max >= 0.0 && i_max <= 1.0)) throw ParameterError("i_max must lie in [0, 1]");
  if (!(s_min >= 0.0 && s_min <= 1.0)) throw ParameterError("s_min must lie in [0, 1]");
  const auto& imb = g[LayerId::imbalance];
  const auto& sat = g[LayerId::s_bar];
  const std::size_t rows = imb.rows(), cols = imb.cols();
  OperatingRegion r{Mask(rows, cols, 0), i_max, s_min, 0.0, {}, std::nullopt, std::nullopt};
  std::size_t inside = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const bool ok = imb(i, j) <= i_max && sat(i, j) >= s_min;
      r.mask(i, j) = ok;
      inside += ok;
    }
  }
  r.aor_percent = 100.0 * static_cast<double>(inside) / static_cast<double>(rows * cols);

  const auto& curv = g[LayerId::d2I_h0h0];
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (!r.mask(i, j)) continue;
      const bool border = i == 0 || j == 0 || i + 1 == rows || j + 1 == cols;
      const bool edge = border || !r.mask(i - 1, j) || !r.mask(i + 1, j) ||
                        !r.mask(i, j - 1) || !r.mask(i, j + 1);
      if (!edge) continue;
      r.boundary_cells.emplace_back(i, j);
      const double v = std::fabs(curv(i, j));
      if (!r.mcr || v > *r.mcr) {
        r.mcr = v;
        r.mcr_cell = std::pair{i, j};
      }
    }
  }
  return r;
}

/// |d2I/dh0^2| / max(|d2I/da^2|, floor) per cell.
inline Layer curvature_asymmetry(const ScanGrid& g, double floor) {
  if (!(floor > 0.0)) throw ParameterError("floor must be > 0");
  const auto& hh = g[LayerId::d2I_h0h0];
  const auto& aa = g[LayerId::d2I_aa];
  Layer out(hh.rows(), hh.cols());
  for (std::size_t i = 0; i < hh.rows(); ++i)
    for (std::size_t j = 0; j < hh.cols(); ++j)
      out(i, j) = std::fabs(hh(i, j)) / std::max(std::fabs(aa(i, j)), floor);
  return out;
}

}  // namespace qoescape

#endif  // QOESCAPE_LANDSCAPE_HPP
