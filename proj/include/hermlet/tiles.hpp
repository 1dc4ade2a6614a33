#pragma once

// Node sets and tile families on Hermite zero grids. Per level j the nodes
// are n-tuples of the zeros of H_{2 N_j} with N_j = [(1+11 d*) (4/pi)^2 4^j] + 3,
// and the tiles are products of the midpoint intervals between consecutive
// zeros (first interval starting at 0, last one padded by 2^{-j/6}). Tiles
// partition the cube Q_j = Q(0, zeta_max + 2^{-j/6}) exactly; each tile
// carries its measure and the cubature weight tau_R (product of Christoffel
// values at the node).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "hermlet/errors.hpp"
#include "hermlet/hermite.hpp"
#include "hermlet/parallel.hpp"
#include "hermlet/report.hpp"

namespace hermlet {

inline constexpr double kDefaultDeltaStar = 1.0 / 40.0;

/// N_j from the level formula.
inline int tile_poly_halforder(double delta_star, int j) {
  double base = (1.0 + 11.0 * delta_star) * (16.0 / (std::numbers::pi * std::numbers::pi));
  return static_cast<int>(std::floor(base * std::ldexp(1.0, 2 * j))) + 3;
}

/// A tile: level plus one interval index per axis (0-based, 0..2N-1).
struct TileRef {
  int level = 0;
  std::vector<int> axes;

  friend bool operator==(const TileRef& a, const TileRef& b) {
    return a.level == b.level && a.axes == b.axes;
  }
  friend bool operator<(const TileRef& a, const TileRef& b) {
    if (a.level != b.level) return a.level < b.level;
    return a.axes < b.axes;
  }
};

/// Signed node index alpha in {-N..-1, 1..N} <-> 0-based interval index.
inline int axis_index_to_alpha(int i, int N) { return i < N ? i - N : i - N + 1; }
inline int alpha_to_axis_index(int alpha, int N) {
  require(alpha != 0 && alpha >= -N && alpha <= N, "tile node index out of range");
  return alpha < 0 ? alpha + N : alpha + N - 1;
}

class TileGrid {
 public:
  struct Level {
    int j = 0;
    int N = 0;                       // half-order; zeros of H_{2N}
    std::vector<double> zeros;       // 2N, strictly increasing
    std::vector<double> boundaries;  // 2N+1 interval endpoints per axis
    std::vector<double> tau1d;       // tau(2N, zeros[i])
    double outer = 0.0;              // zeta_max + 2^{-j/6}
    std::vector<int> pieces;         // subdivision counts per interval (may be empty)

    int axis_count() const { return 2 * N; }
    double length(int i) const {
      return boundaries[static_cast<std::size_t>(i) + 1] - boundaries[static_cast<std::size_t>(i)];
    }
  };

  int dim() const { return n_; }
  double delta_star() const { return delta_star_; }
  int max_level() const { return J_; }
  bool subdivided() const { return subdivided_; }
  const Level& level(int j) const {
    require(j >= 0 && j <= J_, "TileGrid: level out of range");
    return levels_[static_cast<std::size_t>(j)];
  }

  std::uint64_t tile_count(int j) const {
    std::uint64_t per_axis = static_cast<std::uint64_t>(level(j).axis_count());
    std::uint64_t total = 1;
    for (int d = 0; d < n_; ++d) {
      if (total > (1ull << 62) / per_axis) return ~0ull;
      total *= per_axis;
    }
    return total;
  }

  std::vector<double> node(const TileRef& r) const {
    const Level& lv = level(r.level);
    std::vector<double> x(static_cast<std::size_t>(n_));
    for (int d = 0; d < n_; ++d) x[static_cast<std::size_t>(d)] = lv.zeros[static_cast<std::size_t>(r.axes[static_cast<std::size_t>(d)])];
    return x;
  }

  double measure(const TileRef& r) const {
    const Level& lv = level(r.level);
    double m = 1.0;
    for (int d = 0; d < n_; ++d) m *= lv.length(r.axes[static_cast<std::size_t>(d)]);
    return m;
  }

  double tau(const TileRef& r) const {
    const Level& lv = level(r.level);
    double t = 1.0;
    for (int d = 0; d < n_; ++d) t *= lv.tau1d[static_cast<std::size_t>(r.axes[static_cast<std::size_t>(d)])];
    return t;
  }

  void tile_bounds(const TileRef& r, std::span<double> lo, std::span<double> hi) const {
    const Level& lv = level(r.level);
    for (int d = 0; d < n_; ++d) {
      int i = r.axes[static_cast<std::size_t>(d)];
      lo[static_cast<std::size_t>(d)] = lv.boundaries[static_cast<std::size_t>(i)];
      hi[static_cast<std::size_t>(d)] = lv.boundaries[static_cast<std::size_t>(i) + 1];
    }
  }

  /// Iterates fn(TileRef) over all tiles of a level in lexicographic axis order.
  template <class Fn>
  void for_each_tile(int j, Fn&& fn, std::uint64_t scan_cap = 8'000'000) const {
    std::uint64_t count = tile_count(j);
    if (count > scan_cap)
      throw resource_error("tile scan: level tile count exceeds cap");
    const Level& lv = level(j);
    TileRef r;
    r.level = j;
    r.axes.assign(static_cast<std::size_t>(n_), 0);
    int per_axis = lv.axis_count();
    for (;;) {
      fn(static_cast<const TileRef&>(r));
      int d = n_ - 1;
      while (d >= 0) {
        if (++r.axes[static_cast<std::size_t>(d)] < per_axis) break;
        r.axes[static_cast<std::size_t>(d)] = 0;
        --d;
      }
      if (d < 0) return;
    }
  }

  /// The unique level-j tile containing x; half-open intervals except the
  /// last one, so the partition is exact. Returns nullopt outside Q_j.
  std::optional<TileRef> locate(int j, std::span<const double> x) const {
    require(static_cast<int>(x.size()) == n_, "locate: point dimension mismatch");
    const Level& lv = level(j);
    TileRef r;
    r.level = j;
    r.axes.resize(static_cast<std::size_t>(n_));
    for (int d = 0; d < n_; ++d) {
      double t = x[static_cast<std::size_t>(d)];
      if (t < lv.boundaries.front() || t > lv.boundaries.back()) return std::nullopt;
      if (t == lv.boundaries.back()) {
        r.axes[static_cast<std::size_t>(d)] = lv.axis_count() - 1;
        continue;
      }
      auto it = std::upper_bound(lv.boundaries.begin(), lv.boundaries.end(), t);
      r.axes[static_cast<std::size_t>(d)] = static_cast<int>(it - lv.boundaries.begin()) - 1;
    }
    return r;
  }

  /// Cached 1-D Hermite value table for a level: row i holds
  /// h_0..h_{k_max} at zeros[i]. Shared by analysis and synthesis.
  std::shared_ptr<const std::vector<double>> node_table(int j, int k_max) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto key = std::make_pair(j, k_max);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Level& lv = level(j);
    auto tbl = std::make_shared<std::vector<double>>(
        lv.zeros.size() * (static_cast<std::size_t>(k_max) + 1));
    RecurrenceCoeffs c = recurrence_coeffs(k_max);
    std::size_t stride = static_cast<std::size_t>(k_max) + 1;
    for (std::size_t i = 0; i < lv.zeros.size(); ++i) {
      hermite_values_into(k_max, lv.zeros[i], c,
                          std::span<double>(tbl->data() + i * stride, stride));
    }
    cache_[key] = tbl;
    return tbl;
  }

  JsonValue to_json() const {
    JsonValue doc = JsonValue::object();
    doc.set("n", n_);
    doc.set("delta_star", delta_star_);
    doc.set("J", J_);
    doc.set("subdivided", subdivided_);
    JsonValue levels = JsonValue::object();
    for (const Level& lv : levels_) {
      JsonValue l = JsonValue::object();
      l.set("N_j", lv.N);
      l.set("outer_halfwidth", lv.outer);
      l.set("zeros", JsonValue::from_doubles(lv.zeros));
      l.set("boundaries", JsonValue::from_doubles(lv.boundaries));
      l.set("tau", JsonValue::from_doubles(lv.tau1d));
      std::vector<double> lengths(lv.zeros.size());
      for (std::size_t i = 0; i < lengths.size(); ++i)
        lengths[i] = lv.length(static_cast<int>(i));
      l.set("interval_length", JsonValue::from_doubles(lengths));
      if (!lv.pieces.empty()) {
        JsonValue p = JsonValue::array();
        for (int m : lv.pieces) p.push(static_cast<std::int64_t>(m));
        l.set("subdivision_pieces", std::move(p));
      }
      levels.set(std::to_string(lv.j), std::move(l));
    }
    doc.set("levels", std::move(levels));
    return doc;
  }

  friend TileGrid build_grid(int n, double delta_star, int J, bool subdivide,
                             const ZeroOptions& zopt);

 private:
  int n_ = 1;
  double delta_star_ = kDefaultDeltaStar;
  int J_ = 0;
  bool subdivided_ = false;
  std::vector<Level> levels_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<int, int>, std::shared_ptr<const std::vector<double>>> cache_;

 public:
  TileGrid() = default;
  TileGrid(const TileGrid& other)
      : n_(other.n_), delta_star_(other.delta_star_), J_(other.J_),
        subdivided_(other.subdivided_), levels_(other.levels_) {}
  TileGrid(TileGrid&& other) noexcept
      : n_(other.n_), delta_star_(other.delta_star_), J_(other.J_),
        subdivided_(other.subdivided_), levels_(std::move(other.levels_)) {}
  TileGrid& operator=(const TileGrid& other) {
    if (this != &other) {
      n_ = other.n_; delta_star_ = other.delta_star_; J_ = other.J_;
      subdivided_ = other.subdivided_; levels_ = other.levels_;
      std::lock_guard<std::mutex> lock(cache_mutex_);
      cache_.clear();
    }
    return *this;
  }
};

/// Builds all levels 0..J. If subdivide is set, each 1-D interval is split
/// into equal pieces with sidelengths in [c4 2^{-j-1}, c4 2^{-j}], where c4
/// is the smallest scaled interval length over the grid.
inline TileGrid build_grid(int n, double delta_star, int J, bool subdivide = false,
                           const ZeroOptions& zopt = {}) {
  require(n >= 1, "build_grid: dimension must be positive");
  require(delta_star > 0.0 && delta_star < 1.0 / 37.0,
          "build_grid: delta_star must lie in (0, 1/37)");
  require(J >= 0, "build_grid: max level must be nonnegative");
  TileGrid g;
  g.n_ = n;
  g.delta_star_ = delta_star;
  g.J_ = J;
  g.subdivided_ = subdivide;
  g.levels_.resize(static_cast<std::size_t>(J) + 1);
  for (int j = 0; j <= J; ++j) {
    TileGrid::Level& lv = g.levels_[static_cast<std::size_t>(j)];
    lv.j = j;
    lv.N = tile_poly_halforder(delta_star, j);
    ZeroSet zs = hermite_zeros(2 * lv.N, zopt);
    lv.zeros = std::move(zs.zeros);
    lv.outer = lv.zeros.back() + std::exp2(-static_cast<double>(j) / 6.0);
    std::size_t m = lv.zeros.size();
    lv.boundaries.resize(m + 1);
    lv.boundaries.front() = -lv.outer;
    lv.boundaries.back() = lv.outer;
    for (std::size_t i = 1; i < m; ++i)
      lv.boundaries[i] = 0.5 * (lv.zeros[i - 1] + lv.zeros[i]);
    lv.tau1d.resize(m);
    par::parallel_for(m, [&](std::size_t i) {
      lv.tau1d[i] = christoffel(2 * lv.N, lv.zeros[i]);
    });
  }
  if (subdivide) {
    double c4 = std::numeric_limits<double>::infinity();
    for (const TileGrid::Level& lv : g.levels_) {
      for (int i = 0; i < lv.axis_count(); ++i)
        c4 = std::min(c4, std::ldexp(lv.length(i), lv.j));
    }
    for (TileGrid::Level& lv : g.levels_) {
      double target = std::ldexp(c4, -lv.j);
      lv.pieces.resize(static_cast<std::size_t>(lv.axis_count()));
      for (int i = 0; i < lv.axis_count(); ++i) {
        int mces = static_cast<int>(std::ceil(lv.length(i) / target - 1e-12));
        lv.pieces[static_cast<std::size_t>(i)] = std::max(1, mces);
      }
    }
  }
  return g;
}

/// Measured constants for the tile containment bounds, fitted per level.
struct GeometryLevelReport {
  int j = 0;
  double c0 = 0.0;  // outer box radius for central tiles, scaled by 2^j
  double c1 = 0.0;  // inner box radius, scaled by 2^j
  double c2 = 0.0;  // outer box radius for all tiles, scaled by 2^{j/3}
  double c3 = 0.0;  // Q_j halfwidth over 2^j
  bool inner_containment_exact = false;  // Q(0, 2^j) subset of Q_j
  double sub_min_scaled = 0.0;  // min subcube side * 2^j
  double sub_max_scaled = 0.0;  // max subcube side * 2^j
};

struct GeometryReport {
  std::vector<GeometryLevelReport> levels;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  bool subdivision_checked = false;
  bool subdivision_ok = true;
  bool pass = false;

  double stability(double GeometryLevelReport::* field, int j_lo, int j_hi) const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& l : levels) {
      if (l.j < j_lo || l.j > j_hi) continue;
      lo = std::min(lo, l.*field);
      hi = std::max(hi, l.*field);
    }
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
};

inline GeometryReport verify_geometry(const TileGrid& g) {
  GeometryReport rep;
  rep.c1 = std::numeric_limits<double>::infinity();
  double c4_min = std::numeric_limits<double>::infinity();
  double central_bound_factor = (1.0 + 4.0 * g.delta_star()) * 2.0;
  for (int j = 0; j <= g.max_level(); ++j) {
    const TileGrid::Level& lv = g.level(j);
    GeometryLevelReport lr;
    lr.j = j;
    double central_cut = central_bound_factor * std::ldexp(1.0, j);
    double c0 = 0.0, c1 = std::numeric_limits<double>::infinity(), c2 = 0.0;
    for (int i = 0; i < lv.axis_count(); ++i) {
      double node = lv.zeros[static_cast<std::size_t>(i)];
      double lo = lv.boundaries[static_cast<std::size_t>(i)];
      double hi = lv.boundaries[static_cast<std::size_t>(i) + 1];
      double r_out = std::max(hi - node, node - lo);
      double r_in = std::min(hi - node, node - lo);
      if (std::fabs(node) <= central_cut) c0 = std::max(c0, std::ldexp(r_out, j));
      c1 = std::min(c1, std::ldexp(r_in, j));
      c2 = std::max(c2, r_out * std::exp2(static_cast<double>(j) / 3.0));
    }
    lr.c0 = c0;
    lr.c1 = c1;
    lr.c2 = c2;
    lr.c3 = lv.outer / std::ldexp(1.0, j);
    lr.inner_containment_exact = lv.outer >= std::ldexp(1.0, j);
    if (!lv.pieces.empty()) {
      double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
      for (int i = 0; i < lv.axis_count(); ++i) {
        double side = lv.length(i) / lv.pieces[static_cast<std::size_t>(i)];
        smin = std::min(smin, side);
        smax = std::max(smax, side);
      }
      lr.sub_min_scaled = std::ldexp(smin, j);
      lr.sub_max_scaled = std::ldexp(smax, j);
    }
    for (int i = 0; i < lv.axis_count(); ++i)
      c4_min = std::min(c4_min, std::ldexp(lv.length(i), j));
    rep.c0 = std::max(rep.c0, lr.c0);
    rep.c1 = std::min(rep.c1, lr.c1);
    rep.c2 = std::max(rep.c2, lr.c2);
    rep.c3 = std::max(rep.c3, lr.c3);
    rep.levels.push_back(lr);
  }
  rep.c4 = c4_min;
  if (g.subdivided()) {
    rep.subdivision_checked = true;
    for (const auto& lr : rep.levels) {
      if (!(lr.sub_min_scaled >= 0.5 * rep.c4 - 1e-12 &&
            lr.sub_max_scaled <= rep.c4 + 1e-12))
        rep.subdivision_ok = false;
    }
  }
  bool inner_all = true;
  for (const auto& lr : rep.levels) inner_all = inner_all && lr.inner_containment_exact;
  rep.pass = inner_all && rep.c1 > 0.0 && std::isfinite(rep.c0) && std::isfinite(rep.c2) &&
             std::isfinite(rep.c3) && (!rep.subdivision_checked || rep.subdivision_ok);
  return rep;
}

}  // namespace hermlet
