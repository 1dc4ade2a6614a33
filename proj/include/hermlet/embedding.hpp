#pragma once

// Numeric certification of the lower-bound property (tile and ball forms)
// and probes for the sequence-space embeddings. Scans work in log space so
// Gaussian-decay weights keep meaningful trends long after their masses
// underflow.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "hermlet/errors.hpp"
#include "hermlet/frames.hpp"
#include "hermlet/norms.hpp"
#include "hermlet/rng.hpp"
#include "hermlet/tiles.hpp"
#include "hermlet/weights.hpp"

namespace hermlet {

struct EmbeddingParams {
  SpaceParams source;  // (alpha_2, p_2, q_2)
  SpaceParams target;  // (alpha_1, p_1, q_1)
  double gamma = 1.0;
  ScaleFamily scale = ScaleFamily::besov;

  void validate() const {
    require(gamma > 0.0, "embedding: gamma must be positive");
    source.validate();
    target.validate();
    double line1 = target.alpha - gamma / target.p;
    double line2 = source.alpha - gamma / source.p;
    require(std::fabs(line1 - line2) <= 1e-12 * (1.0 + std::fabs(line1)),
            "embedding: alpha_1 - gamma/p_1 must equal alpha_2 - gamma/p_2");
    require(target.alpha <= source.alpha + 1e-15, "embedding: alpha_1 <= alpha_2 required");
    if (scale == ScaleFamily::besov) {
      require(source.q <= target.q + 1e-15, "embedding (b): q_2 <= q_1 required");
      require(source.p <= target.p + 1e-15, "embedding (b): p_2 <= p_1 required");
    } else {
      require(std::isfinite(source.p) && std::isfinite(target.p),
              "embedding (f): p_1, p_2 must be finite");
    }
  }
};

enum class Verdict { PASS, FAIL, INCONCLUSIVE };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::PASS: return "PASS";
    case Verdict::FAIL: return "FAIL";
    default: return "INCONCLUSIVE";
  }
}

/// Three-valued trend rule on per-scale extrema (natural logs), comparing the
/// two deepest scales: stable within factor 2 passes; moving by a factor >= 4
/// in the adverse direction fails; anything else is inconclusive.
/// adverse_sign = -1 when decay is bad (lower bounds), +1 when growth is bad.
inline Verdict trend_verdict(std::span<const double> scale_logs, int adverse_sign) {
  if (scale_logs.size() < 2) return Verdict::INCONCLUSIVE;
  double d = scale_logs[scale_logs.size() - 1] - scale_logs[scale_logs.size() - 2];
  if (std::fabs(d) <= std::numbers::ln2) return Verdict::PASS;
  if (adverse_sign * d >= 2.0 * std::numbers::ln2) return Verdict::FAIL;
  return Verdict::INCONCLUSIVE;
}

/// Running extremum across scan depth. Finite scans certify trends of the
/// global extremum, so the verdict looks at how the running value moved when
/// the deepest scale entered; non-finite entries pass through untouched.
inline std::vector<double> running_extremum(std::span<const double> per_scale, bool minimum) {
  std::vector<double> out;
  double inf = std::numeric_limits<double>::infinity();
  double cur = minimum ? inf : -inf;
  for (double v : per_scale) {
    // a -inf minimum (zero mass) or +inf maximum is a genuine signal; only
    // the opposite-signed infinities (overflowing masses) are ignored
    if (!std::isnan(v) && (minimum ? v < inf : v > -inf))
      cur = minimum ? std::min(cur, v) : std::max(cur, v);
    out.push_back(cur);
  }
  return out;
}

/// Tile form: min over levels and tiles of w(R) 2^{j gamma} (reported in logs).
struct LowerBoundTileReport {
  double min_log = std::numeric_limits<double>::infinity();
  TileRef argmin;
  std::vector<double> level_min_log;
  Verdict verdict = Verdict::INCONCLUSIVE;
};

inline LowerBoundTileReport lower_bound_tiles(const Weight& w, const TileGrid& grid,
                                              double gamma) {
  require(gamma > 0.0, "lower_bound_tiles: gamma must be positive");
  LowerBoundTileReport rep;
  int n = grid.dim();
  std::vector<double> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  for (int j = 0; j <= grid.max_level(); ++j) {
    double level_min = std::numeric_limits<double>::infinity();
    TileRef level_arg;
    grid.for_each_tile(j, [&](const TileRef& r) {
      grid.tile_bounds(r, lo, hi);
      double lm = log_mass(w, BoxSpec{lo, hi}) + gamma * j * std::numbers::ln2;
      if (lm < level_min) {
        level_min = lm;
        level_arg = r;
      }
    });
    rep.level_min_log.push_back(level_min);
    if (level_min < rep.min_log) {
      rep.min_log = level_min;
      rep.argmin = level_arg;
    }
  }
  rep.verdict = trend_verdict(running_extremum(rep.level_min_log, true), -1);
  return rep;
}

/// Ball form: min over sampled centers and admissible radii r <= rho(x) of
/// w(B(x,r)) / r^gamma (logs). Scales bucket by -log2(radius).
struct BallScanPlan {
  double x_max = 8.0;
  int centers_per_axis = 41;
  int radii_per_center = 10;
  double min_radius_factor = 1.0 / 64.0;  // radii span [factor*rho, rho], log-spaced
};

struct LowerBoundBallReport {
  double min_log = std::numeric_limits<double>::infinity();
  std::vector<double> argmin_center;
  double argmin_radius = 0.0;
  std::vector<double> bucket_min_log;  // running min by center magnitude
  Verdict verdict = Verdict::INCONCLUSIVE;
};

inline LowerBoundBallReport lower_bound_balls(const Weight& w, double gamma, int n,
                                              const BallScanPlan& plan = {}) {
  require(gamma > 0.0, "lower_bound_balls: gamma must be positive");
  require(n >= 1 && n <= 2, "lower_bound_balls: dimensions 1 and 2 supported");
  LowerBoundBallReport rep;
  // the lower bound degrades, if at all, as centers move out; bucket minima
  // by center magnitude and judge the running min
  std::map<int, double> buckets;
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  std::vector<std::size_t> it(static_cast<std::size_t>(n), 0);
  for (;;) {
    for (int d = 0; d < n; ++d)
      x[static_cast<std::size_t>(d)] =
          -plan.x_max + 2.0 * plan.x_max *
                            static_cast<double>(it[static_cast<std::size_t>(d)]) /
                            (plan.centers_per_axis - 1);
    double rho = critical_radius(x);
    int bucket = std::max(0, static_cast<int>(std::ceil(std::log2(1.0 + norm_inf(x)))));
    for (int i = 0; i < plan.radii_per_center; ++i) {
      double f = std::pow(plan.min_radius_factor,
                          static_cast<double>(i) / (plan.radii_per_center - 1));
      double r = rho * f;
      double lm = log_mass_ball(w, x, r) - gamma * std::log(r);
      if (!std::isfinite(lm) && lm > 0.0) continue;  // overflowing growth mass
      auto [itb, fresh] = buckets.try_emplace(bucket, lm);
      if (!fresh) itb->second = std::min(itb->second, lm);
      if (lm < rep.min_log) {
        rep.min_log = lm;
        rep.argmin_center = x;
        rep.argmin_radius = r;
      }
    }
    int d = n - 1;
    while (d >= 0) {
      if (++it[static_cast<std::size_t>(d)] <
          static_cast<std::size_t>(plan.centers_per_axis))
        break;
      it[static_cast<std::size_t>(d)] = 0;
      --d;
    }
    if (d < 0) break;
  }
  std::vector<double> per_bucket;
  for (const auto& [b, v] : buckets) per_bucket.push_back(v);
  rep.bucket_min_log = running_extremum(per_bucket, true);
  rep.verdict = trend_verdict(rep.bucket_min_log, -1);
  return rep;
}

/// Singleton-sequence ratio per tile:
///   ||delta_R||_target / ||delta_R||_source = (w(R) 2^{j gamma})^{-(1/p2 - 1/p1)}.
struct NecessityReport {
  double max_ratio_log = -std::numeric_limits<double>::infinity();
  TileRef witness;
  std::vector<double> level_max_log;
  Verdict verdict = Verdict::INCONCLUSIVE;  // PASS = bounded, FAIL = growth
};

inline NecessityReport necessity_probe(const EmbeddingParams& params, const Weight& w,
                                       const TileGrid& grid) {
  params.validate();
  NecessityReport rep;
  double expo = 1.0 / params.source.p - 1.0 / params.target.p;  // >= 0 in the b-scale
  int n = grid.dim();
  std::vector<double> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  for (int j = 0; j <= grid.max_level(); ++j) {
    double level_max = -std::numeric_limits<double>::infinity();
    TileRef level_arg;
    grid.for_each_tile(j, [&](const TileRef& r) {
      grid.tile_bounds(r, lo, hi);
      double base = log_mass(w, BoxSpec{lo, hi}) + params.gamma * j * std::numbers::ln2;
      double lr = -expo * base;
      if (lr > level_max) {
        level_max = lr;
        level_arg = r;
      }
    });
    rep.level_max_log.push_back(level_max);
    if (level_max > rep.max_ratio_log) {
      rep.max_ratio_log = level_max;
      rep.witness = level_arg;
    }
  }
  rep.verdict = trend_verdict(running_extremum(rep.level_max_log, false), +1);
  return rep;
}

/// Sparse random tile sequence: per level up to cap distinct tiles drawn
/// uniformly, magnitudes lognormal(0, 1). Deterministic per seed.
inline FrameSequence random_sequence(const TileGrid& grid, std::uint64_t seed,
                                     int per_level_cap = 200) {
  FrameSequence s;
  s.J = grid.max_level();
  Rng rng(seed);
  for (int j = 0; j <= grid.max_level(); ++j) {
    std::uint64_t count = grid.tile_count(j);
    std::uint64_t want = std::min<std::uint64_t>(static_cast<std::uint64_t>(per_level_cap), count);
    std::set<std::uint64_t> chosen;
    while (chosen.size() < want) chosen.insert(rng.integer(count));
    std::size_t per_axis = static_cast<std::size_t>(grid.level(j).axis_count());
    for (std::uint64_t flat : chosen) {
      TileRef r;
      r.level = j;
      r.axes.assign(static_cast<std::size_t>(grid.dim()), 0);
      std::uint64_t rem = flat;
      for (int d = grid.dim() - 1; d >= 0; --d) {
        r.axes[static_cast<std::size_t>(d)] = static_cast<int>(rem % per_axis);
        rem /= per_axis;
      }
      s.entries[r] = {rng.lognormal(), 0.0};
    }
  }
  return s;
}

/// Empirical embedding constant over random sparse sequences:
/// max and distribution of ||s||_target / ||s||_source.
struct SufficiencyReport {
  double max_ratio = 0.0;
  std::vector<double> ratios;
};

inline SufficiencyReport sufficiency_probe(const EmbeddingParams& params, const Weight& w,
                                           const TileGrid& grid, int trials,
                                           std::uint64_t seed, int per_level_cap = 200) {
  params.validate();
  SufficiencyReport rep;
  rep.ratios.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    FrameSequence s = random_sequence(grid, stream_seed(seed, static_cast<std::uint64_t>(t)),
                                      per_level_cap);
    double num, den;
    if (params.scale == ScaleFamily::besov) {
      num = seq_besov_norm(s, params.target, w, grid).value;
      den = seq_besov_norm(s, params.source, w, grid).value;
    } else {
      num = seq_triebel_norm(s, params.target, w, grid).value;
      den = seq_triebel_norm(s, params.source, w, grid).value;
    }
    double ratio = den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
    rep.ratios.push_back(ratio);
    if (std::isfinite(ratio)) rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

}  // namespace hermlet
