#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hermlet/embedding.hpp"

using namespace hermlet;

namespace {

EmbeddingParams standard_b_params(double gamma = 1.0) {
  EmbeddingParams p;
  p.source = SpaceParams{1.0, 1.0, 1.0, ScaleFamily::besov};
  p.target = SpaceParams{0.5, 2.0, 2.0, ScaleFamily::besov};
  p.gamma = gamma;
  p.scale = ScaleFamily::besov;
  return p;
}

}  // namespace

TEST_CASE("embedding parameter validation") {
  EmbeddingParams ok = standard_b_params();
  CHECK_NOTHROW(ok.validate());
  EmbeddingParams off = ok;
  off.target.alpha = 0.6;  // breaks the alpha - gamma/p line
  CHECK_THROWS_AS(off.validate(), validation_error);
  EmbeddingParams bad_q = ok;
  bad_q.source.q = 3.0;  // q2 > q1 on the b-scale
  CHECK_THROWS_AS(bad_q.validate(), validation_error);
  EmbeddingParams f_ok = ok;
  f_ok.scale = ScaleFamily::triebel;
  f_ok.source.family = f_ok.target.family = ScaleFamily::triebel;
  f_ok.source.q = 3.0;  // any q pair is fine on the f-scale
  CHECK_NOTHROW(f_ok.validate());
}

TEST_CASE("tile lower bound: flat weight passes with the geometric floor") {
  TileGrid grid = build_grid(1, 1.0 / 40.0, 3);
  LowerBoundTileReport rep = lower_bound_tiles(Weight::constant(1.0), grid, 1.0);
  CHECK(rep.verdict == Verdict::PASS);
  // direct oracle: min over tiles of |R| 2^j
  double direct = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 3; ++j) {
    const auto& lv = grid.level(j);
    for (int i = 0; i < lv.axis_count(); ++i)
      direct = std::min(direct, lv.length(i) * std::ldexp(1.0, j));
  }
  CHECK(std::exp(rep.min_log) == Catch::Approx(direct).epsilon(1e-12));
  CHECK(direct > 0.0);
}

TEST_CASE("tile lower bound: gaussian decay fails with an outer witness") {
  TileGrid grid = build_grid(1, 1.0 / 40.0, 3);
  LowerBoundTileReport rep = lower_bound_tiles(Weight::gaussian(1.0, -1), grid, 1.0);
  CHECK(rep.verdict == Verdict::FAIL);
  // witness is an outermost tile of the deepest level
  CHECK(rep.argmin.level == 3);
  int idx = rep.argmin.axes[0];
  int m = grid.level(3).axis_count();
  CHECK((idx == 0 || idx == m - 1));
  // per-level minima decay fast
  for (std::size_t j = 1; j < rep.level_min_log.size(); ++j)
    CHECK(rep.level_min_log[j] < rep.level_min_log[j - 1]);
}

TEST_CASE("tile lower bound: power weight at matched order stays stable") {
  TileGrid grid = build_grid(1, 1.0 / 40.0, 4);
  LowerBoundTileReport rep = lower_bound_tiles(Weight::power(0.5), grid, 1.5);
  CHECK(rep.verdict == Verdict::PASS);
  // min over the deepest levels within a factor 2 of each other
  std::size_t L = rep.level_min_log.size();
  CHECK(std::fabs(rep.level_min_log[L - 1] - rep.level_min_log[L - 2]) <=
        std::numbers::ln2 + 1e-9);
}

TEST_CASE("ball lower bound") {
  // flat weight: |B(x, r)| / r = 2 for every admissible ball
  LowerBoundBallReport flat = lower_bound_balls(Weight::constant(1.0), 1.0, 1);
  CHECK(std::exp(flat.min_log) == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(flat.verdict == Verdict::PASS);
  // gaussian growth dominates the flat weight pointwise
  LowerBoundBallReport grow = lower_bound_balls(Weight::gaussian(1.0, 1), 1.0, 1);
  CHECK(std::exp(grow.min_log) >= 2.0 - 1e-12);
  CHECK(grow.verdict == Verdict::PASS);
  // gaussian decay fails
  BallScanPlan deep;
  deep.x_max = 35.0;
  LowerBoundBallReport fail = lower_bound_balls(Weight::gaussian(1.0, -1), 1.0, 1, deep);
  CHECK(fail.verdict == Verdict::FAIL);
  CHECK(std::fabs(fail.argmin_center[0]) > 30.0);
}

TEST_CASE("tile and ball verdicts agree on the built-in families") {
  TileGrid grid = build_grid(1, 1.0 / 40.0, 3);
  GeometryReport geo = verify_geometry(grid);
  BallScanPlan plan;
  plan.x_max = geo.c3 * 8.0;
  struct Case {
    Weight w;
    double gamma;
    Verdict expect;
  };
  std::vector<Case> cases{{Weight::constant(1.0), 1.0, Verdict::PASS},
                          {Weight::power(0.5), 1.5, Verdict::PASS},
                          {Weight::gaussian(1.0, 1), 1.0, Verdict::PASS},
                          {Weight::gaussian(1.0, -1), 1.0, Verdict::FAIL}};
  for (const auto& c : cases) {
    Verdict tiles = lower_bound_tiles(c.w, grid, c.gamma).verdict;
    Verdict balls = lower_bound_balls(c.w, c.gamma, 1, plan).verdict;
    CHECK(tiles == c.expect);
    CHECK(balls == c.expect);
  }
}

TEST_CASE("monotonicity: raising gamma never repairs a failing weight") {
  TileGrid grid = build_grid(1, 1.0 / 40.0, 3);
  Weight w = Weight::gaussian(1.0, -1);
  REQUIRE(lower_bound_tiles(w, grid, 1.0).verdict == Verdict::FAIL);
  for (double gamma : {1.5, 2.0, 3.0})
    CHECK(lower_bound_tiles(w, grid, gamma).verdict == Verdict::FAIL);
}

TEST_CASE("necessity probe") {
  TileGrid grid = build_grid(1, 1.0 / 40.0, 3);
  EmbeddingParams params = standard_b_params();
  // flat weight: bounded, stable across levels
  NecessityReport flat = necessity_probe(params, Weight::constant(1.0), grid);
  CHECK(flat.verdict == Verdict::PASS);
  CHECK(std::isfinite(flat.max_ratio_log));
  // gaussian decay: grows without bound, FAIL
  NecessityReport gau = necessity_probe(params, Weight::gaussian(1.0, -1), grid);
  CHECK(gau.verdict == Verdict::FAIL);
  std::size_t L = gau.level_max_log.size();
  CHECK(gau.level_max_log[L - 1] - gau.level_max_log[L - 2] > 2.0 * std::numbers::ln2);
  // identical exponents force ratio exactly one
  EmbeddingParams same;
  same.source = SpaceParams{0.7, 2.0, 1.0, ScaleFamily::besov};
  same.target = SpaceParams{0.7, 2.0, 2.0, ScaleFamily::besov};
  same.gamma = 1.0;
  NecessityReport one = necessity_probe(same, Weight::gaussian(1.0, -1), grid);
  CHECK(one.max_ratio_log == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("necessity ratio equals the algebraic rearrangement") {
  TileGrid grid = build_grid(1, 1.0 / 40.0, 2);
  Weight w = Weight::power(0.5);
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    double gamma = 0.5 + 2.0 * rng.uniform();
    double p2 = 0.5 + rng.uniform();
    double p1 = p2 + rng.uniform();
    double a2 = 1.0 + rng.uniform();
    double a1 = a2 - gamma / p2 + gamma / p1;
    EmbeddingParams params;
    params.source = SpaceParams{a2, p2, 1.0, ScaleFamily::besov};
    params.target = SpaceParams{a1, p1, 2.0, ScaleFamily::besov};
    params.gamma = gamma;
    // per-tile check on a sample of tiles
    const auto& lv = grid.level(2);
    for (int i : {0, 3, lv.N, 2 * lv.N - 1}) {
      TileRef r;
      r.level = 2;
      r.axes = {i};
      std::vector<double> lo(1), hi(1);
      grid.tile_bounds(r, lo, hi);
      double base = mass(w, BoxSpec{lo, hi}) * std::pow(2.0, 2.0 * gamma);
      double direct =
          std::pow(2.0, 2.0 * (a1 - a2)) * std::pow(mass(w, BoxSpec{lo, hi}),
                                                    1.0 / p1 - 1.0 / p2);
      double rearranged = std::pow(base, -(1.0 / p2 - 1.0 / p1));
      CHECK(direct == Catch::Approx(rearranged).epsilon(1e-12));
    }
  }
}

TEST_CASE("sufficiency probe") {
  TileGrid grid = build_grid(1, 1.0 / 40.0, 3);
  Weight one = Weight::constant(1.0);
  EmbeddingParams params = standard_b_params();
  // singleton sequences reproduce the necessity ratio exactly
  TileRef r;
  r.level = 2;
  r.axes = {5};
  FrameSequence single;
  single.J = 2;
  single.entries[r] = 1.0;
  double num = seq_besov_norm(single, params.target, one, grid).value;
  double den = seq_besov_norm(single, params.source, one, grid).value;
  std::vector<double> lo(1), hi(1);
  grid.tile_bounds(r, lo, hi);
  double base = mass(one, BoxSpec{lo, hi}) * std::pow(2.0, 2.0 * params.gamma);
  double expect = std::pow(base, -(1.0 / params.source.p - 1.0 / params.target.p));
  CHECK(num / den == Catch::Approx(expect).epsilon(1e-12));
  // empirical constant stays put as trials double (nested ensembles)
  SufficiencyReport r50 = sufficiency_probe(params, one, grid, 50, 7);
  SufficiencyReport r100 = sufficiency_probe(params, one, grid, 100, 7);
  CHECK(r100.max_ratio >= r50.max_ratio);  // nested by construction
  CHECK(r100.max_ratio <= 2.0 * r50.max_ratio);
  for (double ratio : r50.ratios) CHECK(std::isfinite(ratio));
  // f-scale with q1 < q2 is allowed and stays finite
  EmbeddingParams fparams;
  fparams.source = SpaceParams{1.0, 1.0, 3.0, ScaleFamily::triebel};
  fparams.target = SpaceParams{0.5, 2.0, 2.0, ScaleFamily::triebel};
  fparams.gamma = 1.0;
  fparams.scale = ScaleFamily::triebel;
  SufficiencyReport fr = sufficiency_probe(fparams, one, grid, 10, 7, 40);
  CHECK(fr.max_ratio > 0.0);
  CHECK(std::isfinite(fr.max_ratio));
}

TEST_CASE("random sequences are reproducible and capped") {
  TileGrid grid = build_grid(1, 1.0 / 40.0, 2);
  FrameSequence a = random_sequence(grid, 42, 7);
  FrameSequence b = random_sequence(grid, 42, 7);
  REQUIRE(a.entries.size() == b.entries.size());
  auto ita = a.entries.begin();
  auto itb = b.entries.begin();
  for (; ita != a.entries.end(); ++ita, ++itb) {
    CHECK(ita->first == itb->first);
    CHECK(ita->second == itb->second);
  }
  // per-level cap respected
  std::map<int, int> counts;
  for (const auto& [r, v] : a.entries) counts[r.level]++;
  for (const auto& [lvl, c] : counts) CHECK(c <= 7);
}

TEST_CASE("flat-weight tile floor is consistent with the inner-cube constant") {
  TileGrid grid = build_grid(1, 1.0 / 40.0, 3);
  GeometryReport geo = verify_geometry(grid);
  LowerBoundTileReport rep = lower_bound_tiles(Weight::constant(1.0), grid, 1.0);
  // every tile contains Q(x_R, c1 2^{-j}), so |R| 2^j >= 2 c1
  CHECK(std::exp(rep.min_log) >= 2.0 * geo.c1 - 1e-12);
}
