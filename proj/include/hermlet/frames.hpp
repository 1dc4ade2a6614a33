#pragma once

// Needlet frames on tile grids: cubature pairing, frame elements, the
// analysis and synthesis operators (computed exactly in coefficient space),
// and the sampling probes used to exercise the frame inequalities.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "hermlet/errors.hpp"
#include "hermlet/expansion.hpp"
#include "hermlet/lpw.hpp"
#include "hermlet/multiplier.hpp"
#include "hermlet/parallel.hpp"
#include "hermlet/report.hpp"
#include "hermlet/tiles.hpp"
#include "hermlet/weights.hpp"

namespace hermlet {

/// Coefficients indexed by tiles; absent keys read as zero.
struct FrameSequence {
  using Scalar = std::complex<double>;

  int J = 0;  // band parameter of the analyzed function (f in V_{4^J})
  std::map<TileRef, Scalar> entries;

  Scalar value(const TileRef& r) const {
    auto it = entries.find(r);
    return it == entries.end() ? Scalar(0.0, 0.0) : it->second;
  }

  int max_level() const {
    int m = -1;
    for (const auto& [r, v] : entries) m = std::max(m, r.level);
    return m;
  }

  JsonValue to_json(const TileGrid& grid) const {
    JsonValue doc = JsonValue::object();
    doc.set("J", J);
    JsonValue arr = JsonValue::array();
    for (const auto& [r, v] : entries) {
      JsonValue e = JsonValue::object();
      e.set("j", r.level);
      JsonValue node = JsonValue::array();
      int N = grid.level(r.level).N;
      for (int i : r.axes)
        node.push(static_cast<std::int64_t>(axis_index_to_alpha(i, N)));
      e.set("node", std::move(node));
      e.set("re", v.real());
      e.set("im", v.imag());
      arr.push(std::move(e));
    }
    doc.set("entries", std::move(arr));
    return doc;
  }

  static FrameSequence from_json(const nlohmann::json& j, const TileGrid& grid) {
    require(j.is_object() && j.contains("J") && j["J"].is_number_integer(),
            "frame sequence: missing integer 'J'");
    require(j.contains("entries") && j["entries"].is_array(),
            "frame sequence: missing array 'entries'");
    FrameSequence s;
    s.J = j["J"].get<int>();
    for (const auto& e : j["entries"]) {
      require(e.contains("j") && e.contains("node") && e.contains("re") && e.contains("im"),
              "frame sequence: entry needs j, node, re, im");
      TileRef r;
      r.level = e["j"].get<int>();
      require(r.level >= 0 && r.level <= grid.max_level(),
              "frame sequence: entry level outside grid");
      int N = grid.level(r.level).N;
      for (int alpha : e["node"].get<std::vector<int>>())
        r.axes.push_back(alpha_to_axis_index(alpha, N));
      require(static_cast<int>(r.axes.size()) == grid.dim(),
              "frame sequence: node dimension mismatch");
      require(!s.entries.count(r), "frame sequence: duplicate tile entry");
      s.entries[r] = {e["re"].get<double>(), e["im"].get<double>()};
    }
    return s;
  }
};

/// Flat index of a tile within its level (last axis fastest).
inline std::size_t tile_flat_index(const TileGrid& grid, const TileRef& r) {
  std::size_t per_axis = static_cast<std::size_t>(grid.level(r.level).axis_count());
  std::size_t idx = 0;
  for (int a : r.axes) idx = idx * per_axis + static_cast<std::size_t>(a);
  return idx;
}

/// sum over nodes of tau_zeta f(zeta) g(zeta); exact for f in V_k, g in V_l
/// with k + l <= 4 N_j - 1.
template <class F, class G>
double cubature_integrate(const TileGrid& grid, int j, F&& f, G&& g) {
  double acc = 0.0;
  std::vector<double> x(static_cast<std::size_t>(grid.dim()));
  grid.for_each_tile(j, [&](const TileRef& r) {
    const auto& lv = grid.level(j);
    for (int d = 0; d < grid.dim(); ++d)
      x[static_cast<std::size_t>(d)] =
          lv.zeros[static_cast<std::size_t>(r.axes[static_cast<std::size_t>(d)])];
    acc += grid.tau(r) * f(std::span<const double>(x)) * g(std::span<const double>(x));
  });
  return acc;
}

/// Frame element attached to tile R evaluated at x:
/// phi_R(x) = tau_R^{1/2} phi_j(sqrt(L))(x, x_R).
inline double needlet_eval(const MultiplierSystem& sys, const TileGrid& grid,
                           const TileRef& r, std::span<const double> x) {
  std::vector<double> node = grid.node(r);
  return std::sqrt(grid.tau(r)) * multiplier_kernel(sys, r.level, x, node);
}

namespace detail {

// g(x_R) for every tile of one level, from the cached node table.
// Results indexed by tile_flat_index.
inline std::vector<std::complex<double>> eval_on_level_nodes(
    const TileGrid& grid, int j, const HermiteExpansion& g, int k_hi) {
  const TileGrid::Level& lv = grid.level(j);
  auto tbl = grid.node_table(j, k_hi);
  std::size_t stride = static_cast<std::size_t>(k_hi) + 1;
  std::size_t per_axis = static_cast<std::size_t>(lv.axis_count());
  int n = grid.dim();
  std::uint64_t count = grid.tile_count(j);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(count));
  if (n == 1) {
    par::parallel_for(per_axis, [&](std::size_t i) {
      const double* row = tbl->data() + i * stride;
      std::complex<double> acc(0.0, 0.0);
      for (int k = 0; k <= k_hi; ++k)
        acc += g.at_flat(static_cast<std::size_t>(k)) * row[k];
      out[i] = acc;
    });
    return out;
  }
  par::parallel_for(static_cast<std::size_t>(count), [&](std::size_t flat) {
    // decode axes (last fastest)
    std::vector<std::size_t> axes(static_cast<std::size_t>(n));
    std::size_t rem = flat;
    for (int d = n - 1; d >= 0; --d) {
      axes[static_cast<std::size_t>(d)] = rem % per_axis;
      rem /= per_axis;
    }
    std::complex<double> acc(0.0, 0.0);
    for (int k = 0; k <= k_hi; ++k) {
      std::size_t idx = g.degree_offset(k);
      for_each_composition(k, n, [&](std::span<const int> xi) {
        double basis = 1.0;
        for (int d = 0; d < n; ++d)
          basis *= tbl->data()[axes[static_cast<std::size_t>(d)] * stride +
                               static_cast<std::size_t>(xi[static_cast<std::size_t>(d)])];
        acc += g.at_flat(idx++) * basis;
      });
    }
    out[flat] = acc;
  });
  return out;
}

}  // namespace detail

/// Analysis operator: s_R = <f, phi_R> = tau_R^{1/2} (phi_j(sqrt(L)) f)(x_R)
/// for tiles at levels j <= J+2 (the bands active on V_{4^J}).
inline FrameSequence analyze(const MultiplierSystem& sys, const TileGrid& grid,
                             const HermiteExpansion& f, int J) {
  require(f.dim() == grid.dim(), "analyze: expansion/grid dimension mismatch");
  require(J >= 0, "analyze: J must be nonnegative");
  double band_cap = std::ldexp(1.0, 2 * J);  // 4^J
  require(f.active_degree() <= static_cast<int>(band_cap),
          "analyze: expansion has coefficients beyond V_{4^J}");
  require(grid.max_level() >= J + 2,
          "analyze: grid must be built to level J+2");
  FrameSequence s;
  s.J = J;
  for (int j = 0; j <= J + 2; ++j) {
    SupportIndexSet is = support_index_set(sys, j, grid.dim());
    if (is.empty() || is.k_min > f.max_degree()) continue;
    HermiteExpansion g = apply_multiplier(sys, j, f);
    if (g.active_degree() < 0) continue;
    int k_hi = static_cast<int>(std::min<std::int64_t>(is.k_max, f.max_degree()));
    auto vals = detail::eval_on_level_nodes(grid, j, g, k_hi);
    std::size_t idx = 0;
    grid.for_each_tile(j, [&](const TileRef& r) {
      double root_tau = std::sqrt(grid.tau(r));
      s.entries.emplace(r, root_tau * vals[idx++]);
    });
  }
  return s;
}

/// Synthesis operator: accumulates s_R tau_R^{1/2} psi_j(sqrt(lambda_mu)) h_mu(x_R)
/// into coefficient mu, summed over all tiles.
inline HermiteExpansion synthesize(const MultiplierSystem& sys_dual, const TileGrid& grid,
                                   const FrameSequence& s) {
  int n = grid.dim();
  int jmax = s.max_level();
  if (jmax < 0) return HermiteExpansion(n, 0);
  int n_out = 0;
  for (int j = 0; j <= jmax; ++j) {
    SupportIndexSet is = support_index_set(sys_dual, j, n);
    if (!is.empty()) n_out = std::max(n_out, static_cast<int>(is.k_max));
  }
  HermiteExpansion out(n, n_out);
  for (int j = 0; j <= jmax; ++j) {
    SupportIndexSet is = support_index_set(sys_dual, j, n);
    if (is.empty()) continue;
    // gather the level's entries in map (lexicographic) order
    std::vector<const std::pair<const TileRef, FrameSequence::Scalar>*> level_entries;
    for (const auto& kv : s.entries)
      if (kv.first.level == j && kv.second != FrameSequence::Scalar(0.0, 0.0))
        level_entries.push_back(&kv);
    if (level_entries.empty()) continue;
    int k_hi = static_cast<int>(is.k_max);
    auto tbl = grid.node_table(j, k_hi);
    std::size_t stride = static_cast<std::size_t>(k_hi) + 1;
    std::vector<double> factor(static_cast<std::size_t>(k_hi) + 1, 0.0);
    for (std::int64_t k = is.k_min; k <= is.k_max; ++k)
      factor[static_cast<std::size_t>(k)] =
          sys_dual.eval(j, std::sqrt(eigenvalue(k, n)));
    if (n == 1) {
      // level sum per degree: psi_j(sqrt(lambda_k)) * sum_R s_R tau^{1/2} h_k(x_R)
      std::vector<std::complex<double>> acc(static_cast<std::size_t>(k_hi) + 1,
                                            {0.0, 0.0});
      par::parallel_for(acc.size(), [&](std::size_t k) {
        if (factor[k] == 0.0) return;
        std::complex<double> sum(0.0, 0.0);
        for (const auto* kv : level_entries) {
          std::size_t row = static_cast<std::size_t>(kv->first.axes[0]);
          sum += kv->second * std::sqrt(grid.tau(kv->first)) * tbl->data()[row * stride + k];
        }
        acc[k] = factor[k] * sum;
      });
      for (std::size_t k = 0; k < acc.size(); ++k) out.at_flat(k) += acc[k];
    } else {
      std::size_t total = out.size();
      std::vector<std::complex<double>> acc(total, {0.0, 0.0});
      std::vector<double> root_tau(level_entries.size());
      for (std::size_t i = 0; i < level_entries.size(); ++i)
        root_tau[i] = std::sqrt(grid.tau(level_entries[i]->first));
      par::parallel_for(static_cast<std::size_t>(k_hi) + 1, [&](std::size_t k) {
        if (factor[k] == 0.0) return;
        std::size_t idx = out.degree_offset(static_cast<int>(k));
        for_each_composition(static_cast<int>(k), n, [&](std::span<const int> xi) {
          std::complex<double> sum(0.0, 0.0);
          for (std::size_t i = 0; i < level_entries.size(); ++i) {
            const TileRef& r = level_entries[i]->first;
            double basis = 1.0;
            for (int d = 0; d < n; ++d)
              basis *= tbl->data()[static_cast<std::size_t>(r.axes[static_cast<std::size_t>(d)]) * stride +
                                   static_cast<std::size_t>(xi[static_cast<std::size_t>(d)])];
            sum += level_entries[i]->second * root_tau[i] * basis;
          }
          acc[idx] = factor[k] * sum;
          ++idx;
        });
      });
      for (std::size_t i = 0; i < total; ++i) out.at_flat(i) += acc[i];
    }
  }
  return out;
}

/// Sampling-inequality probe at one level:
///   (sum_R w(R) max_{x in R} |g|^p)^{1/p} / ||g||_{L^p_w}.
/// The per-tile max samples a fixed lattice per subdivided cube and is a
/// documented under-estimate of the true sup.
struct PlancherelPolyaReport {
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;
};

inline PlancherelPolyaReport plancherel_polya_probe(const TileGrid& grid, int j,
                                                    const HermiteExpansion& g, double p,
                                                    const Weight& w,
                                                    int samples_per_cube_axis = 5) {
  require(p > 0.0 && std::isfinite(p), "plancherel_polya_probe: p must be finite positive");
  require(g.dim() == grid.dim(), "plancherel_polya_probe: dimension mismatch");
  double band_cap = std::ldexp(1.0, 2 * j);
  require(g.active_degree() <= static_cast<int>(band_cap),
          "plancherel_polya_probe: g must be band-limited to V_{4^j}");
  require(grid.subdivided(), "plancherel_polya_probe: grid must carry subdivided cubes");
  int n = grid.dim();
  const TileGrid::Level& lv = grid.level(j);
  double acc = 0.0;
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<double> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  grid.for_each_tile(j, [&](const TileRef& r) {
    grid.tile_bounds(r, lo, hi);
    // per-axis sample coordinates: per subdivided piece, an interior lattice
    std::vector<std::vector<double>> samples(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
      int i = r.axes[static_cast<std::size_t>(d)];
      int pieces = lv.pieces[static_cast<std::size_t>(i)];
      double a = lo[static_cast<std::size_t>(d)], b = hi[static_cast<std::size_t>(d)];
      double step = (b - a) / pieces;
      for (int pc = 0; pc < pieces; ++pc)
        for (int q = 0; q < samples_per_cube_axis; ++q)
          samples[static_cast<std::size_t>(d)].push_back(
              a + step * (pc + (q + 0.5) / samples_per_cube_axis));
    }
    double best = 0.0;
    std::vector<std::size_t> it(static_cast<std::size_t>(n), 0);
    for (;;) {
      for (int d = 0; d < n; ++d)
        x[static_cast<std::size_t>(d)] = samples[static_cast<std::size_t>(d)][it[static_cast<std::size_t>(d)]];
      best = std::max(best, std::abs(g.evaluate(x)));
      int d = n - 1;
      while (d >= 0) {
        if (++it[static_cast<std::size_t>(d)] < samples[static_cast<std::size_t>(d)].size()) break;
        it[static_cast<std::size_t>(d)] = 0;
        --d;
      }
      if (d < 0) break;
    }
    BoxSpec box{lo, hi};
    acc += mass(w, box) * std::pow(best, p);
  });
  PlancherelPolyaReport rep;
  rep.numerator = std::pow(acc, 1.0 / p);
  rep.denominator = lpw_norm(g, p, w);
  rep.ratio = rep.denominator > 0.0 ? rep.numerator / rep.denominator
                                    : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

/// Peetre-type maximal probe: for per-tile values a_R at level j computes
///   a*_j(x) = sum_R |a_R| (1 + 2^j |x - x_R|)^{-sigma}
/// against the discrete maximal operator of sum_R |a_R| 1_R, and returns the
/// max over sample points of left / right.
struct PeetreReport {
  double max_ratio = 0.0;
  std::vector<double> ratios;
};

inline PeetreReport peetre_probe(const TileGrid& grid, int j,
                                 std::span<const double> tile_values, double sigma,
                                 double s, double theta,
                                 std::span<const double> sample_points,
                                 double c_tilde = 0.5, const CubeFamily& family = {}) {
  int n = grid.dim();
  require(n == 1, "peetre_probe: one-dimensional grids supported");
  require(s > 0.0 && theta >= 0.0, "peetre_probe: bad s or theta");
  require(sigma > theta / s + std::max(1.0, 1.0 / s),
          "peetre_probe: sigma must exceed theta/s + max(n, n/s)");
  const TileGrid::Level& lv = grid.level(j);
  std::size_t m = static_cast<std::size_t>(lv.axis_count());
  require(tile_values.size() == m, "peetre_probe: need one value per tile");
  // piecewise-constant |a| on the tile cells
  std::vector<double> vals(m);
  for (std::size_t i = 0; i < m; ++i) vals[i] = std::fabs(tile_values[i]);
  GridFunction f(lv.boundaries, vals);
  double pow2j = std::ldexp(1.0, j);
  PeetreReport rep;
  for (double x : sample_points) {
    double left = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (vals[i] == 0.0) continue;
      left += vals[i] * std::pow(1.0 + pow2j * std::fabs(x - lv.zeros[i]), -sigma);
    }
    double r_cube = c_tilde * std::ldexp(1.0, -j);
    double right = std::numeric_limits<double>::infinity();
    const int probes = 5;
    for (int q = 0; q < probes; ++q) {
      double y = x - r_cube + 2.0 * r_cube * (q + 0.5) / probes;
      double pt[1] = {y};
      right = std::min(right, maximal(f, s, theta, std::span<const double>(pt, 1), family));
    }
    double ratio = right > 0.0 ? left / right
                   : left == 0.0 ? 0.0
                                 : std::numeric_limits<double>::infinity();
    rep.ratios.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

}  // namespace hermlet
