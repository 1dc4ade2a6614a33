#pragma once

// Weighted Besov / Triebel-Lizorkin norms for finite Hermite expansions and
// the matching sequence-space norms over tile coefficients. Function norms
// integrate on a shared Gauss-Legendre mesh with a certified Gaussian tail
// bound; sequence Triebel-Lizorkin norms integrate the piecewise-constant
// integrand exactly over the arrangement of supported tiles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hermlet/errors.hpp"
#include "hermlet/expansion.hpp"
#include "hermlet/frames.hpp"
#include "hermlet/lpw.hpp"
#include "hermlet/multiplier.hpp"
#include "hermlet/tiles.hpp"
#include "hermlet/weights.hpp"

namespace hermlet {

enum class ScaleFamily { besov, triebel };

struct SpaceParams {
  double alpha = 0.0;
  double p = 2.0;
  double q = 2.0;
  ScaleFamily family = ScaleFamily::besov;

  static constexpr double kExponentFloor = 0.1;

  void validate() const {
    if (std::isfinite(p)) require(p >= kExponentFloor, "space: p below supported floor");
    if (std::isfinite(q)) require(q >= kExponentFloor, "space: q below supported floor");
    require(p > 0.0 && q > 0.0, "space: p, q must be positive");
    if (family == ScaleFamily::triebel)
      require(std::isfinite(p), "space: p must be finite on the Triebel-Lizorkin scale");
  }

  /// Parses "a=0.5,p=2,q=inf" (alpha also accepted for a).
  static SpaceParams parse(const std::string& text, ScaleFamily family) {
    SpaceParams ps;
    ps.family = family;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find(',', pos);
      if (end == std::string::npos) end = text.size();
      std::string item = text.substr(pos, end - pos);
      std::size_t eq = item.find('=');
      require(eq != std::string::npos, "space: expected key=value in '" + item + "'");
      std::string key = item.substr(0, eq);
      std::string val = item.substr(eq + 1);
      double v = (val == "inf" || val == "Inf" || val == "INF")
                     ? std::numeric_limits<double>::infinity()
                     : std::stod(val);
      if (key == "a" || key == "alpha")
        ps.alpha = v;
      else if (key == "p")
        ps.p = v;
      else if (key == "q")
        ps.q = v;
      else
        throw validation_error("space: unknown key '" + key + "'");
      pos = end + 1;
    }
    ps.validate();
    return ps;
  }
};

namespace detail {

// (sum_i a_i^e)^{1/e} with max-factoring; e = inf gives the sup.
inline double lp_combine(std::span<const double> a, double e) {
  double m = 0.0;
  for (double v : a) m = std::max(m, v);
  if (m == 0.0) return 0.0;
  if (std::isinf(e)) return m;
  double s = 0.0;
  for (double v : a) s += std::pow(v / m, e);
  return m * std::pow(s, 1.0 / e);
}

}  // namespace detail

struct NormBreakdown {
  double value = 0.0;
  std::vector<double> per_level;  // level contributions before the q-combine
};

/// Shared evaluation state for function norms: per-level multiplier images of
/// f evaluated on a fixed mesh. Reusable across many (params, weight) pairs.
class LevelEvaluation {
 public:
  LevelEvaluation(const MultiplierSystem& sys, const HermiteExpansion& f, int J,
                  const LpwOptions& opt = {}) {
    require(f.dim() >= 1 && f.dim() <= 2, "norms: dimensions 1 and 2 supported");
    require(J >= 0, "norms: J must be nonnegative");
    double band_cap = std::ldexp(1.0, 2 * J);
    require(f.active_degree() <= static_cast<int>(band_cap),
            "norms: expansion has coefficients beyond V_{4^J}");
    n_ = f.dim();
    levels_ = J + 3;  // bands 0..J+2 cover V_{4^J}
    int k_cap = 0;
    for (int j = 0; j < levels_; ++j) {
      SupportIndexSet is = support_index_set(sys, j, n_);
      if (!is.empty())
        k_cap = std::max(k_cap, static_cast<int>(std::min<std::int64_t>(
                                    is.k_max, f.max_degree())));
    }
    double turning = std::sqrt(2.0 * k_cap + static_cast<double>(n_));
    double X = opt.x_max > 0.0 ? opt.x_max
                               : std::max(6.5 * std::ldexp(1.0, J), turning + 4.0);
    double width =
        opt.panel_width > 0.0
            ? opt.panel_width
            : opt.panel_scale *
                  std::min(0.5, 2.0 * std::numbers::pi / (4.0 * std::max(4.0, turning)));
    if (n_ == 2) width *= 2.0;  // keep the tensor mesh tractable
    mesh_ = PanelMesh::build(X, width);
    max_active_degree_ = k_cap;

    // dense per-level coefficient vectors (n = 1) or expansions (n = 2)
    std::vector<HermiteExpansion> gs;
    gs.reserve(static_cast<std::size_t>(levels_));
    coeff_l2_.resize(static_cast<std::size_t>(levels_), 0.0);
    for (int j = 0; j < levels_; ++j) {
      HermiteExpansion g = apply_multiplier(sys, j, f);
      double l2 = g.l2_norm();
      coeff_l2_[static_cast<std::size_t>(j)] = l2;
      gs.push_back(std::move(g));
    }
    std::size_t npts = mesh_.points1d.size();
    std::size_t cells = n_ == 1 ? npts : npts * npts;
    abs_.assign(static_cast<std::size_t>(levels_) * cells, 0.0);
    if (n_ == 1) {
      RecurrenceCoeffs rc = recurrence_coeffs(k_cap);
      par::parallel_for(npts, [&](std::size_t i) {
        std::vector<double> h(static_cast<std::size_t>(k_cap) + 1);
        hermite_values_into(k_cap, mesh_.points1d[i], rc, h);
        for (int j = 0; j < levels_; ++j) {
          const HermiteExpansion& g = gs[static_cast<std::size_t>(j)];
          std::complex<double> acc(0.0, 0.0);
          int hi = std::min(k_cap, g.max_degree());
          for (int k = 0; k <= hi; ++k)
            acc += g.at_flat(static_cast<std::size_t>(k)) * h[static_cast<std::size_t>(k)];
          abs_[static_cast<std::size_t>(j) * cells + i] = std::abs(acc);
        }
      });
    } else {
      RecurrenceCoeffs rc = recurrence_coeffs(k_cap);
      par::parallel_for(npts, [&](std::size_t iy) {
        std::vector<double> hx(static_cast<std::size_t>(k_cap) + 1);
        std::vector<double> hy(static_cast<std::size_t>(k_cap) + 1);
        hermite_values_into(k_cap, mesh_.points1d[iy], rc, hy);
        for (std::size_t ix = 0; ix < npts; ++ix) {
          hermite_values_into(k_cap, mesh_.points1d[ix], rc, hx);
          std::size_t cell = iy * npts + ix;
          for (int j = 0; j < levels_; ++j) {
            const HermiteExpansion& g = gs[static_cast<std::size_t>(j)];
            std::complex<double> acc(0.0, 0.0);
            int hi = std::min(k_cap, g.max_degree());
            for (int k = 0; k <= hi; ++k) {
              std::size_t idx = g.degree_offset(k);
              for_each_composition(k, 2, [&](std::span<const int> xi) {
                acc += g.at_flat(idx++) * hx[static_cast<std::size_t>(xi[0])] *
                       hy[static_cast<std::size_t>(xi[1])];
              });
            }
            abs_[static_cast<std::size_t>(j) * cells + cell] = std::abs(acc);
          }
        }
      });
    }
  }

  int levels() const { return levels_; }
  int dim() const { return n_; }
  const PanelMesh& mesh() const { return mesh_; }
  double level_abs(int j, std::size_t cell) const {
    std::size_t cells = cell_count();
    return abs_[static_cast<std::size_t>(j) * cells + cell];
  }
  std::size_t cell_count() const {
    std::size_t npts = mesh_.points1d.size();
    return n_ == 1 ? npts : npts * npts;
  }
  double cell_weight(std::size_t cell, const Weight& w) const {
    std::size_t npts = mesh_.points1d.size();
    if (n_ == 1) {
      double pt[1] = {mesh_.points1d[cell]};
      return mesh_.weights1d[cell] * w(std::span<const double>(pt, 1));
    }
    std::size_t iy = cell / npts, ix = cell % npts;
    double pt[2] = {mesh_.points1d[ix], mesh_.points1d[iy]};
    return mesh_.weights1d[ix] * mesh_.weights1d[iy] * w(std::span<const double>(pt, 2));
  }
  double coeff_l2(int j) const { return coeff_l2_[static_cast<std::size_t>(j)]; }
  int max_active_degree() const { return max_active_degree_; }

 private:
  int n_ = 1;
  int levels_ = 0;
  int max_active_degree_ = 0;
  PanelMesh mesh_;
  std::vector<double> abs_;       // [level][cell]
  std::vector<double> coeff_l2_;  // per-level coefficient mass
};

/// Besov norm from a prepared evaluation:
///   ( sum_j (2^{j alpha} ||phi_j(sqrt(L)) f||_{L^p_w})^q )^{1/q}.
inline NormBreakdown besov_norm(const LevelEvaluation& ev, const SpaceParams& params,
                                const Weight& w) {
  SpaceParams ps = params;
  ps.family = ScaleFamily::besov;
  ps.validate();
  if (std::isinf(ps.p))
    require(w.locally_bounded(), "besov_norm: p = inf needs a locally bounded weight");
  NormBreakdown out;
  std::size_t cells = ev.cell_count();
  std::vector<double> level_vals;
  for (int j = 0; j < ev.levels(); ++j) {
    double lp;
    if (std::isinf(ps.p)) {
      double sup = 0.0;
      for (std::size_t c = 0; c < cells; ++c) sup = std::max(sup, ev.level_abs(j, c));
      lp = sup;
    } else {
      double acc = 0.0;
      for (std::size_t c = 0; c < cells; ++c) {
        double v = ev.level_abs(j, c);
        if (v != 0.0) acc += std::pow(v, ps.p) * ev.cell_weight(c, w);
      }
      double tail = 0.0;
      if (ev.dim() == 1 && ev.coeff_l2(j) > 0.0)
        tail = lpw_tail_bound(ev.max_active_degree(), ev.coeff_l2(j), ps.p, w,
                              ev.mesh().x_max);
      lp = std::pow(acc + tail, 1.0 / ps.p);
    }
    double term = std::pow(2.0, ps.alpha * j) * lp;
    out.per_level.push_back(term);
  }
  out.value = detail::lp_combine(out.per_level, ps.q);
  return out;
}

/// Triebel-Lizorkin norm from a prepared evaluation:
///   || ( sum_j (2^{j alpha} |phi_j(sqrt(L)) f|)^q )^{1/q} ||_{L^p_w}.
inline NormBreakdown triebel_norm(const LevelEvaluation& ev, const SpaceParams& params,
                                  const Weight& w) {
  SpaceParams ps = params;
  ps.family = ScaleFamily::triebel;
  ps.validate();
  NormBreakdown out;
  std::size_t cells = ev.cell_count();
  double acc = 0.0;
  std::vector<double> stack(static_cast<std::size_t>(ev.levels()));
  for (std::size_t c = 0; c < cells; ++c) {
    for (int j = 0; j < ev.levels(); ++j)
      stack[static_cast<std::size_t>(j)] =
          std::pow(2.0, ps.alpha * j) * ev.level_abs(j, c);
    double g = detail::lp_combine(stack, ps.q);
    if (g != 0.0) acc += std::pow(g, ps.p) * ev.cell_weight(c, w);
  }
  // certified tail: ell^q of the level envelopes collapses onto one envelope
  double tail = 0.0;
  if (ev.dim() == 1) {
    double coeff_eff = 0.0;
    for (int j = 0; j < ev.levels(); ++j)
      coeff_eff += std::pow(2.0, std::max(0.0, ps.alpha * j)) * ev.coeff_l2(j);
    double lcount = static_cast<double>(ev.levels());
    coeff_eff *= std::pow(lcount, std::max(1.0, 1.0 / ps.q));
    if (coeff_eff > 0.0)
      tail = lpw_tail_bound(ev.max_active_degree(), coeff_eff, ps.p, w, ev.mesh().x_max);
  }
  out.value = std::pow(acc + tail, 1.0 / ps.p);
  // per-level breakdown: L^p_w mass of each level's share (diagnostic)
  for (int j = 0; j < ev.levels(); ++j) {
    double lvl = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      double v = std::pow(2.0, ps.alpha * j) * ev.level_abs(j, c);
      if (v != 0.0) lvl += std::pow(v, ps.p) * ev.cell_weight(c, w);
    }
    out.per_level.push_back(std::pow(lvl, 1.0 / ps.p));
  }
  return out;
}

/// Convenience wrappers building the evaluation on the fly.
inline NormBreakdown besov_norm(const HermiteExpansion& f, const MultiplierSystem& sys,
                                const SpaceParams& params, const Weight& w, int J,
                                const LpwOptions& opt = {}) {
  return besov_norm(LevelEvaluation(sys, f, J, opt), params, w);
}

inline NormBreakdown triebel_norm(const HermiteExpansion& f, const MultiplierSystem& sys,
                                  const SpaceParams& params, const Weight& w, int J,
                                  const LpwOptions& opt = {}) {
  return triebel_norm(LevelEvaluation(sys, f, J, opt), params, w);
}

namespace detail {

struct LevelEntry {
  TileRef ref;
  double weighted = 0.0;  // |R|^{-1/2} |s_R|
};

inline std::map<int, std::vector<LevelEntry>> collect_levels(const FrameSequence& s,
                                                             const TileGrid& grid) {
  std::map<int, std::vector<LevelEntry>> by_level;
  for (const auto& [r, v] : s.entries) {
    double av = std::abs(v);
    if (av == 0.0) continue;
    require(r.level <= grid.max_level(), "sequence norm: entry level outside grid");
    by_level[r.level].push_back({r, av / std::sqrt(grid.measure(r))});
  }
  return by_level;
}

}  // namespace detail

/// Sequence Besov norm:
///   { sum_j 2^{j alpha q} ( sum_R (w(R)^{1/p} |R|^{-1/2} |s_R|)^p )^{q/p} }^{1/q}.
inline NormBreakdown seq_besov_norm(const FrameSequence& s, const SpaceParams& params,
                                    const Weight& w, const TileGrid& grid) {
  SpaceParams ps = params;
  ps.family = ScaleFamily::besov;
  ps.validate();
  auto by_level = detail::collect_levels(s, grid);
  NormBreakdown out;
  std::vector<double> terms;
  std::vector<double> lo(static_cast<std::size_t>(grid.dim()));
  std::vector<double> hi(static_cast<std::size_t>(grid.dim()));
  for (const auto& [j, entries] : by_level) {
    std::vector<double> inner;
    inner.reserve(entries.size());
    for (const auto& e : entries) {
      double wfac = 1.0;
      if (!std::isinf(ps.p)) {
        grid.tile_bounds(e.ref, lo, hi);
        wfac = std::pow(mass(w, BoxSpec{lo, hi}), 1.0 / ps.p);
      }
      inner.push_back(wfac * e.weighted);
    }
    double level_norm = detail::lp_combine(inner, ps.p);
    terms.push_back(std::pow(2.0, ps.alpha * j) * level_norm);
  }
  out.per_level = terms;
  out.value = detail::lp_combine(terms, ps.q);
  return out;
}

struct ArrangementOptions {
  std::uint64_t max_cells = 4'000'000;
};

/// Sequence Triebel-Lizorkin norm:
///   || ( sum_j 2^{j alpha q} sum_R (1_R |R|^{-1/2} |s_R|)^q )^{1/q} ||_{L^p_w}.
/// Tiles are disjoint per level, so the integrand is constant on cells of the
/// arrangement of supported tile boundaries; integration is exact.
inline NormBreakdown seq_triebel_norm(const FrameSequence& s, const SpaceParams& params,
                                      const Weight& w, const TileGrid& grid,
                                      const ArrangementOptions& opt = {}) {
  SpaceParams ps = params;
  ps.family = ScaleFamily::triebel;
  ps.validate();
  auto by_level = detail::collect_levels(s, grid);
  NormBreakdown out;
  if (by_level.empty()) return out;
  int n = grid.dim();
  require(n >= 1 && n <= 2, "seq_triebel_norm: dimensions 1 and 2 supported");
  // arrangement cuts per axis from supported tile bounds
  std::vector<std::vector<double>> cuts(static_cast<std::size_t>(n));
  std::vector<double> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  // per-level lookup: flat tile index -> weighted value
  std::map<int, std::map<std::size_t, double>> lookup;
  for (const auto& [j, entries] : by_level) {
    auto& m = lookup[j];
    for (const auto& e : entries) {
      grid.tile_bounds(e.ref, lo, hi);
      for (int d = 0; d < n; ++d) {
        cuts[static_cast<std::size_t>(d)].push_back(lo[static_cast<std::size_t>(d)]);
        cuts[static_cast<std::size_t>(d)].push_back(hi[static_cast<std::size_t>(d)]);
      }
      m[tile_flat_index(grid, e.ref)] = e.weighted;
    }
  }
  for (auto& c : cuts) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  std::uint64_t cells = 1;
  for (const auto& c : cuts) cells *= static_cast<std::uint64_t>(c.size() - 1);
  if (cells > opt.max_cells)
    throw resource_error("seq_triebel_norm: arrangement cell cap exceeded");

  std::vector<double> stack;
  double acc = 0.0;
  std::vector<std::size_t> it(static_cast<std::size_t>(n), 0);
  std::vector<double> center(static_cast<std::size_t>(n));
  BoxSpec cell;
  cell.lo.resize(static_cast<std::size_t>(n));
  cell.hi.resize(static_cast<std::size_t>(n));
  for (;;) {
    for (int d = 0; d < n; ++d) {
      const auto& c = cuts[static_cast<std::size_t>(d)];
      cell.lo[static_cast<std::size_t>(d)] = c[it[static_cast<std::size_t>(d)]];
      cell.hi[static_cast<std::size_t>(d)] = c[it[static_cast<std::size_t>(d)] + 1];
      center[static_cast<std::size_t>(d)] =
          0.5 * (cell.lo[static_cast<std::size_t>(d)] + cell.hi[static_cast<std::size_t>(d)]);
    }
    stack.clear();
    for (const auto& [j, m] : lookup) {
      auto ref = grid.locate(j, center);
      if (!ref) continue;
      auto itv = m.find(tile_flat_index(grid, *ref));
      if (itv == m.end()) continue;
      stack.push_back(std::pow(2.0, ps.alpha * j) * itv->second);
    }
    if (!stack.empty()) {
      double g = detail::lp_combine(stack, ps.q);
      acc += std::pow(g, ps.p) * mass(w, cell);
    }
    int d = n - 1;
    while (d >= 0) {
      if (++it[static_cast<std::size_t>(d)] + 1 < cuts[static_cast<std::size_t>(d)].size()) break;
      it[static_cast<std::size_t>(d)] = 0;
      --d;
    }
    if (d < 0) break;
  }
  out.value = std::pow(acc, 1.0 / ps.p);
  return out;
}

}  // namespace hermlet
