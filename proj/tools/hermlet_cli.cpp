// hermlet command line: builds tile grids and multiplier systems, runs
// needlet analysis/synthesis, computes weighted function and sequence norms,
// certifies weight classes, and produces embedding and diagnostic reports.
// All reports are JSON with deterministic formatting; files are written
// atomically. Exit codes: 0 success, 2 validation error, 3 numerical error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hermlet/hermlet.hpp"

namespace {

using namespace hermlet;

constexpr int kDefaultJ = 3;
constexpr int kDefaultN = 1;
constexpr double kDefaultTolQuadrature = 1e-8;
constexpr double kDefaultTolReconstruction = 1e-8;

struct GlobalOpts {
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  double tol_quadrature = kDefaultTolQuadrature;
  double tol_reconstruction = kDefaultTolReconstruction;
};

JsonValue base_config(const GlobalOpts& g) {
  JsonValue c = JsonValue::object();
  c.set("seed", static_cast<std::int64_t>(g.seed));
  c.set("threads", g.threads);
  c.set("tol_quadrature", g.tol_quadrature);
  c.set("tol_reconstruction", g.tol_reconstruction);
  c.set("default_delta_star", kDefaultDeltaStar);
  c.set("default_J", kDefaultJ);
  c.set("default_n", kDefaultN);
  return c;
}

void emit(const GlobalOpts& g, JsonValue doc) {
  if (g.out.empty()) {
    std::fputs((doc.dump(2) + "\n").c_str(), stdout);
  } else {
    write_report(g.out, doc);
  }
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw validation_error("cannot open input file: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw validation_error("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

Weight load_weight(const std::string& path) {
  if (path.empty() || path == "1") return Weight::constant(1.0);
  return Weight::from_json(load_json(path));
}

MultiplierSystem make_system(const std::string& name, bool want_dual) {
  MultiplierSystem base = [&]() {
    if (name == "partition") return build_partition_system();
    if (name == "partition-alt") return build_partition_system(0.01, 0.8);
    return MultiplierSystem::from_json(load_json(name));
  }();
  if (!want_dual) return base;
  return base.kind() == MultiplierSystem::Kind::dual ? base : dual_system(base);
}

JsonValue histogram_json(const std::vector<double>& vals, int bins = 20) {
  JsonValue h = JsonValue::object();
  std::vector<double> logs;
  for (double v : vals)
    if (std::isfinite(v) && v > 0.0) logs.push_back(std::log10(v));
  if (logs.empty()) {
    h.set("bins", JsonValue::array());
    return h;
  }
  double lo = *std::min_element(logs.begin(), logs.end());
  double hi = *std::max_element(logs.begin(), logs.end());
  if (hi <= lo) hi = lo + 1e-12;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
  for (double l : logs) {
    int b = static_cast<int>((l - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  h.set("log10_min", lo);
  h.set("log10_max", hi);
  JsonValue arr = JsonValue::array();
  for (auto c : counts) arr.push(c);
  h.set("bins", std::move(arr));
  return h;
}

void write_histogram_csv(const std::string& path, const std::vector<double>& vals,
                         int bins = 20) {
  std::vector<double> logs;
  for (double v : vals)
    if (std::isfinite(v) && v > 0.0) logs.push_back(std::log10(v));
  std::ostringstream os;
  os << "bin_log10_lo,bin_log10_hi,count\n";
  if (!logs.empty()) {
    double lo = *std::min_element(logs.begin(), logs.end());
    double hi = *std::max_element(logs.begin(), logs.end());
    if (hi <= lo) hi = lo + 1e-12;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    for (double l : logs) {
      int b = static_cast<int>((l - lo) / (hi - lo) * bins);
      b = std::clamp(b, 0, bins - 1);
      ++counts[static_cast<std::size_t>(b)];
    }
    char buf[128];
    for (int b = 0; b < bins; ++b) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%lld\n", lo + (hi - lo) * b / bins,
                    lo + (hi - lo) * (b + 1) / bins,
                    static_cast<long long>(counts[static_cast<std::size_t>(b)]));
      os << buf;
    }
  }
  atomic_write(path, os.str());
}

JsonValue tile_json(const TileGrid& grid, const TileRef& r) {
  JsonValue t = JsonValue::object();
  t.set("j", r.level);
  JsonValue node = JsonValue::array();
  int N = grid.level(r.level).N;
  for (int i : r.axes) node.push(static_cast<std::int64_t>(axis_index_to_alpha(i, N)));
  t.set("node", std::move(node));
  JsonValue coords = JsonValue::array();
  for (double c : grid.node(r)) coords.push(c);
  t.set("node_coords", std::move(coords));
  return t;
}

int smallest_band_parameter(int degree) {  // smallest J with degree <= 4^J
  int J = 0;
  while (std::ldexp(1.0, 2 * J) < degree) ++J;
  return J;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted Besov/Triebel-Lizorkin analysis for Hermite expansions"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOpts g;
  app.add_option("--out", g.out, "output JSON path (stdout when omitted)");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_option("--tol-quadrature", g.tol_quadrature, "quadrature tolerance override");
  app.add_option("--tol-reconstruction", g.tol_reconstruction,
                 "reconstruction tolerance override");

  std::function<void()> action;

  // ---- grid ----
  auto* grid_cmd = app.add_subcommand("grid", "build a tile grid and export it");
  {
    auto n = std::make_shared<int>(kDefaultN);
    auto J = std::make_shared<int>(kDefaultJ);
    auto delta = std::make_shared<double>(kDefaultDeltaStar);
    auto subdivide = std::make_shared<bool>(false);
    grid_cmd->add_option("--n", *n, "dimension");
    grid_cmd->add_option("--J", *J, "max level");
    grid_cmd->add_option("--delta-star", *delta, "tile constant in (0, 1/37)");
    grid_cmd->add_flag("--subdivide", *subdivide, "attach subdivided cubes");
    grid_cmd->callback([&, n, J, delta, subdivide] {
      action = [&, n, J, delta, subdivide] {
        TileGrid grid = build_grid(*n, *delta, *J, *subdivide);
        JsonValue doc = grid.to_json();
        doc.set("config", base_config(g));
        emit(g, std::move(doc));
      };
    });
  }

  // ---- analyze ----
  auto* an_cmd = app.add_subcommand("analyze", "needlet analysis of an expansion");
  {
    auto in = std::make_shared<std::string>();
    auto system = std::make_shared<std::string>("partition");
    auto J = std::make_shared<int>(kDefaultJ);
    auto delta = std::make_shared<double>(kDefaultDeltaStar);
    an_cmd->add_option("--in", *in, "expansion JSON")->required();
    an_cmd->add_option("--system", *system, "partition | partition-alt | file.json");
    an_cmd->add_option("--J", *J, "band parameter (f in V_{4^J})");
    an_cmd->add_option("--delta-star", *delta, "tile constant");
    an_cmd->callback([&, in, system, J, delta] {
      action = [&, in, system, J, delta] {
        HermiteExpansion f = HermiteExpansion::from_json(load_json(*in));
        MultiplierSystem sys = make_system(*system, false);
        TileGrid grid = build_grid(f.dim(), *delta, *J + 2);
        FrameSequence s = analyze(sys, grid, f, *J);
        JsonValue doc = s.to_json(grid);
        doc.set("config", base_config(g));
        emit(g, std::move(doc));
      };
    });
  }

  // ---- synthesize ----
  auto* syn_cmd = app.add_subcommand("synthesize", "needlet synthesis of a sequence");
  {
    auto in = std::make_shared<std::string>();
    auto system = std::make_shared<std::string>("partition");
    auto delta = std::make_shared<double>(kDefaultDeltaStar);
    auto n = std::make_shared<int>(kDefaultN);
    syn_cmd->add_option("--in", *in, "frame sequence JSON")->required();
    syn_cmd->add_option("--system", *system,
                        "partition | partition-alt | file.json (dual is applied)");
    syn_cmd->add_option("--delta-star", *delta, "tile constant");
    syn_cmd->add_option("--n", *n, "dimension");
    syn_cmd->callback([&, in, system, delta, n] {
      action = [&, in, system, delta, n] {
        nlohmann::json sj = load_json(*in);
        int levels = 0;
        for (const auto& e : sj.value("entries", nlohmann::json::array()))
          levels = std::max(levels, e.value("j", 0));
        TileGrid grid = build_grid(*n, *delta, levels);
        FrameSequence s = FrameSequence::from_json(sj, grid);
        MultiplierSystem dual = make_system(*system, true);
        HermiteExpansion f = synthesize(dual, grid, s);
        // expansion files keep the strict schema: no report fields
        emit(g, f.to_json());
      };
    });
  }

  // ---- norm ----
  auto* norm_cmd = app.add_subcommand("norm", "weighted function or sequence norm");
  {
    auto kind = std::make_shared<std::string>("besov");
    auto space = std::make_shared<std::string>("a=0,p=2,q=2");
    auto weight = std::make_shared<std::string>();
    auto in = std::make_shared<std::string>();
    auto system = std::make_shared<std::string>("partition");
    auto J = std::make_shared<int>(-1);
    auto delta = std::make_shared<double>(kDefaultDeltaStar);
    norm_cmd->add_option("--kind", *kind, "besov | triebel");
    norm_cmd->add_option("--space", *space, "e.g. a=0.5,p=2,q=2");
    norm_cmd->add_option("--weight", *weight, "weight JSON (default constant 1)");
    norm_cmd->add_option("--in", *in, "expansion or frame-sequence JSON")->required();
    norm_cmd->add_option("--system", *system, "multiplier system for function norms");
    norm_cmd->add_option("--J", *J, "band parameter (default: from input degree)");
    norm_cmd->add_option("--delta-star", *delta, "tile constant for sequence norms");
    norm_cmd->callback([&, kind, space, weight, in, system, J, delta] {
      action = [&, kind, space, weight, in, system, J, delta] {
        require(*kind == "besov" || *kind == "triebel", "norm: kind must be besov|triebel");
        ScaleFamily family =
            *kind == "besov" ? ScaleFamily::besov : ScaleFamily::triebel;
        SpaceParams ps = SpaceParams::parse(*space, family);
        Weight w = load_weight(*weight);
        nlohmann::json input = load_json(*in);
        JsonValue doc = JsonValue::object();
        NormBreakdown nb;
        if (input.contains("coeffs")) {
          HermiteExpansion f = HermiteExpansion::from_json(input);
          MultiplierSystem sys = make_system(*system, false);
          int band = *J >= 0 ? *J : smallest_band_parameter(std::max(0, f.active_degree()));
          LpwOptions opt;
          // tighter quadrature tolerances shrink the panel width (GL15 panels
          // converge at order 30, so the scaling is gentle)
          if (g.tol_quadrature > 0.0 && g.tol_quadrature != kDefaultTolQuadrature)
            opt.panel_scale = std::clamp(
                std::pow(g.tol_quadrature / kDefaultTolQuadrature, 1.0 / 30.0), 0.25, 2.0);
          LevelEvaluation ev(sys, f, band, opt);
          nb = family == ScaleFamily::besov ? besov_norm(ev, ps, w)
                                            : triebel_norm(ev, ps, w);
          doc.set("kind", *kind);
          doc.set("input", "function");
          doc.set("J", band);
        } else if (input.contains("entries")) {
          int levels = 0;
          int n = kDefaultN;
          for (const auto& e : input["entries"]) {
            levels = std::max(levels, e.value("j", 0));
            if (e.contains("node") && e["node"].is_array())
              n = static_cast<int>(e["node"].size());
          }
          TileGrid grid = build_grid(n, *delta, levels);
          FrameSequence s = FrameSequence::from_json(input, grid);
          nb = family == ScaleFamily::besov ? seq_besov_norm(s, ps, w, grid)
                                            : seq_triebel_norm(s, ps, w, grid);
          doc.set("kind", std::string("seq-") + *kind);
          doc.set("input", "sequence");
        } else {
          throw validation_error("norm: input is neither an expansion nor a sequence");
        }
        doc.set("value", nb.value);
        JsonValue breakdown = JsonValue::object();
        for (std::size_t j = 0; j < nb.per_level.size(); ++j)
          breakdown.set(std::to_string(j), nb.per_level[j]);
        doc.set("breakdown", std::move(breakdown));
        doc.set("config", base_config(g));
        emit(g, std::move(doc));
      };
    });
  }

  // ---- weight certify ----
  auto* weight_cmd = app.add_subcommand("weight", "weight class operations");
  auto* certify_cmd = weight_cmd->add_subcommand("certify", "growth-class certificate");
  {
    auto weight = std::make_shared<std::string>();
    auto p = std::make_shared<double>(2.0);
    auto eta = std::make_shared<double>(0.0);
    auto depth = std::make_shared<int>(6);
    auto n = std::make_shared<int>(kDefaultN);
    certify_cmd->add_option("--weight", *weight, "weight JSON")->required();
    certify_cmd->add_option("--p", *p, "integrability index (>= 1)");
    certify_cmd->add_option("--eta", *eta, "growth exponent (>= 0)");
    certify_cmd->add_option("--scan-depth", *depth, "smallest sidelength 2^-depth");
    certify_cmd->add_option("--n", *n, "dimension");
    certify_cmd->callback([&, weight, p, eta, depth, n] {
      action = [&, weight, p, eta, depth, n] {
        Weight w = load_weight(*weight);
        AhpScanPlan plan;
        plan.depth = *depth;
        AhpCertificate cert = ahp_certificate(w, *p, *eta, *n, plan);
        JsonValue doc = JsonValue::object();
        doc.set("p", *p);
        doc.set("eta", *eta);
        doc.set("max_ratio", cert.max_ratio);
        JsonValue cube = JsonValue::object();
        cube.set("center", JsonValue::from_doubles(cert.argmax.center));
        cube.set("half", cert.argmax.half);
        doc.set("argmax_cube", std::move(cube));
        doc.set("cubes_scanned", cert.cubes);
        doc.set("counterexamples", cert.counterexamples);
        doc.set("config", base_config(g));
        emit(g, std::move(doc));
      };
    });
  }

  // ---- embed check ----
  auto* embed_cmd = app.add_subcommand("embed", "embedding certification");
  auto* check_cmd = embed_cmd->add_subcommand("check", "lower bound + embedding probes");
  {
    auto source = std::make_shared<std::string>("a=1,p=1,q=1");
    auto target = std::make_shared<std::string>("a=0.5,p=2,q=2");
    auto gamma = std::make_shared<double>(-1.0);
    auto weight = std::make_shared<std::string>();
    auto J = std::make_shared<int>(kDefaultJ);
    auto n = std::make_shared<int>(kDefaultN);
    auto delta = std::make_shared<double>(kDefaultDeltaStar);
    auto trials = std::make_shared<int>(500);
    auto scale = std::make_shared<std::string>("b");
    auto report_path = std::make_shared<std::string>();
    auto csv_path = std::make_shared<std::string>();
    check_cmd->add_option("--source", *source, "source space a=,p=,q=");
    check_cmd->add_option("--target", *target, "target space a=,p=,q=");
    check_cmd->add_option("--gamma", *gamma, "order (default n)");
    check_cmd->add_option("--weight", *weight, "weight JSON (default constant 1)");
    check_cmd->add_option("--J", *J, "max level");
    check_cmd->add_option("--n", *n, "dimension");
    check_cmd->add_option("--delta-star", *delta, "tile constant");
    check_cmd->add_option("--trials", *trials, "random sequences for the empirical constant");
    check_cmd->add_option("--scale", *scale, "b | f");
    check_cmd->add_option("--report", *report_path, "report path (alias of --out)");
    check_cmd->add_option("--csv", *csv_path, "histogram CSV export");
    check_cmd->callback([&, source, target, gamma, weight, J, n, delta, trials, scale,
                         report_path, csv_path] {
      action = [&, source, target, gamma, weight, J, n, delta, trials, scale, report_path,
                csv_path] {
        ScaleFamily fam = *scale == "f" ? ScaleFamily::triebel : ScaleFamily::besov;
        EmbeddingParams params;
        params.source = SpaceParams::parse(*source, fam);
        params.target = SpaceParams::parse(*target, fam);
        params.gamma = *gamma > 0.0 ? *gamma : static_cast<double>(*n);
        params.scale = fam;
        params.validate();
        Weight w = load_weight(*weight);
        TileGrid grid = build_grid(*n, *delta, *J);
        GeometryReport geo = verify_geometry(grid);

        LowerBoundTileReport tiles = lower_bound_tiles(w, grid, params.gamma);
        BallScanPlan plan;
        plan.x_max = geo.c3 * std::ldexp(1.0, *J);
        LowerBoundBallReport balls = lower_bound_balls(w, params.gamma, *n, plan);
        NecessityReport nec = necessity_probe(params, w, grid);
        SufficiencyReport suf =
            sufficiency_probe(params, w, grid, *trials, g.seed);

        JsonValue doc = JsonValue::object();
        doc.set("gamma", params.gamma);
        doc.set("scale", *scale);
        JsonValue lbt = JsonValue::object();
        lbt.set("verdict", to_string(tiles.verdict));
        lbt.set("min_log10", tiles.min_log / std::numbers::ln10);
        lbt.set("min", std::exp(tiles.min_log));
        lbt.set("witness", tile_json(grid, tiles.argmin));
        lbt.set("level_min_log10", [&] {
          JsonValue a = JsonValue::array();
          for (double v : tiles.level_min_log) a.push(v / std::numbers::ln10);
          return a;
        }());
        doc.set("lower_bound_tiles", std::move(lbt));
        JsonValue lbb = JsonValue::object();
        lbb.set("verdict", to_string(balls.verdict));
        lbb.set("min_log10", balls.min_log / std::numbers::ln10);
        lbb.set("min", std::exp(balls.min_log));
        JsonValue wit = JsonValue::object();
        wit.set("center", JsonValue::from_doubles(balls.argmin_center));
        wit.set("radius", balls.argmin_radius);
        lbb.set("witness", std::move(wit));
        doc.set("lower_bound_balls", std::move(lbb));
        JsonValue nj = JsonValue::object();
        nj.set("verdict", to_string(nec.verdict));
        nj.set("max_ratio_log10", nec.max_ratio_log / std::numbers::ln10);
        nj.set("max_ratio", std::exp(nec.max_ratio_log));
        nj.set("witness", tile_json(grid, nec.witness));
        nj.set("level_max_log10", [&] {
          JsonValue a = JsonValue::array();
          for (double v : nec.level_max_log) a.push(v / std::numbers::ln10);
          return a;
        }());
        doc.set("necessity", std::move(nj));
        JsonValue sj = JsonValue::object();
        sj.set("trials", *trials);
        sj.set("empirical_constant", suf.max_ratio);
        sj.set("ratio_histogram", histogram_json(suf.ratios));
        doc.set("sufficiency", std::move(sj));
        doc.set("config", [&] {
          JsonValue c = base_config(g);
          c.set("n", *n);
          c.set("J", *J);
          c.set("delta_star", *delta);
          return c;
        }());
        if (!csv_path->empty()) write_histogram_csv(*csv_path, suf.ratios);
        if (!report_path->empty() && g.out.empty()) g.out = *report_path;
        emit(g, std::move(doc));
      };
    });
  }

  // ---- diagnose ----
  auto* diag_cmd = app.add_subcommand("diagnose", "numeric verification probes");
  {
    auto* kd = diag_cmd->add_subcommand("kernel-decay", "kernel envelope bound");
    auto kd_j = std::make_shared<int>(3);
    auto kd_N = std::make_shared<int>(6);
    auto kd_eps = std::make_shared<double>(5.0);
    kd->add_option("--j", *kd_j, "scale");
    kd->add_option("--N", *kd_N, "decay order");
    kd->add_option("--epsilon", *kd_eps, "cutoff parameter (> 4)");
    kd->callback([&, kd_j, kd_N, kd_eps] {
      action = [&, kd_j, kd_N, kd_eps] {
        MultiplierSystem sys = build_partition_system();
        auto pairs = kernel_decay_grid(*kd_j, *kd_eps);
        KernelDecayReport rep = kernel_decay_diagnostic(sys, *kd_j, *kd_N, *kd_eps, pairs);
        JsonValue doc = JsonValue::object();
        doc.set("j", rep.scale);
        doc.set("decay_order", rep.decay_order);
        doc.set("epsilon", rep.epsilon);
        doc.set("theta_fit", rep.theta_fit);
        doc.set("theta_lsq", rep.theta_lsq);
        doc.set("c_fit", rep.c_fit);
        doc.set("max_violation", rep.max_violation);
        doc.set("points", rep.points);
        doc.set("far_points", rep.far_points);
        doc.set("pass", std::isfinite(rep.c_fit));
        doc.set("config", base_config(g));
        emit(g, std::move(doc));
      };
    });

    auto* geo = diag_cmd->add_subcommand("geometry", "tile containment constants");
    auto geo_J = std::make_shared<int>(kDefaultJ);
    auto geo_n = std::make_shared<int>(kDefaultN);
    auto geo_delta = std::make_shared<double>(kDefaultDeltaStar);
    geo->add_option("--J", *geo_J, "max level");
    geo->add_option("--n", *geo_n, "dimension");
    geo->add_option("--delta-star", *geo_delta, "tile constant");
    geo->callback([&, geo_J, geo_n, geo_delta] {
      action = [&, geo_J, geo_n, geo_delta] {
        TileGrid grid = build_grid(*geo_n, *geo_delta, *geo_J, true);
        GeometryReport rep = verify_geometry(grid);
        JsonValue doc = JsonValue::object();
        doc.set("pass", rep.pass);
        doc.set("c0", rep.c0);
        doc.set("c1", rep.c1);
        doc.set("c2", rep.c2);
        doc.set("c3", rep.c3);
        doc.set("c4", rep.c4);
        JsonValue lv = JsonValue::array();
        for (const auto& l : rep.levels) {
          JsonValue e = JsonValue::object();
          e.set("j", l.j);
          e.set("c0", l.c0);
          e.set("c1", l.c1);
          e.set("c2", l.c2);
          e.set("c3", l.c3);
          e.set("inner_containment_exact", l.inner_containment_exact);
          e.set("subcube_min_scaled", l.sub_min_scaled);
          e.set("subcube_max_scaled", l.sub_max_scaled);
          lv.push(std::move(e));
        }
        doc.set("levels", std::move(lv));
        doc.set("config", base_config(g));
        emit(g, std::move(doc));
      };
    });

    auto* orth = diag_cmd->add_subcommand("orthogonality", "composed multiplier kernels");
    auto o_j = std::make_shared<int>(2);
    auto o_k = std::make_shared<int>(5);
    orth->add_option("--j", *o_j, "first scale");
    orth->add_option("--k", *o_k, "second scale");
    orth->callback([&, o_j, o_k] {
      action = [&, o_j, o_k] {
        MultiplierSystem sys = build_partition_system();
        MultiplierSystem dual = dual_system(sys);
        std::vector<double> xs, ys;
        for (int i = 0; i <= 40; ++i) xs.push_back(-10.0 + 0.5 * i);
        ys = xs;
        OrthogonalityReport rep = orthogonality_check(sys, dual, *o_j, *o_k, xs, ys);
        JsonValue doc = JsonValue::object();
        doc.set("j", *o_j);
        doc.set("k", *o_k);
        doc.set("max_abs", rep.max_abs);
        doc.set("empty_intersection", rep.empty_intersection);
        bool expect_zero = std::abs(*o_j - *o_k) >= 3;
        doc.set("pass", !expect_zero || rep.max_abs < 1e-13);
        doc.set("config", base_config(g));
        emit(g, std::move(doc));
      };
    });

    auto* fs = diag_cmd->add_subcommand("fefferman-stein", "vector maximal inequality probe");
    auto fs_p = std::make_shared<double>(2.0);
    auto fs_q = std::make_shared<double>(2.0);
    auto fs_s = std::make_shared<double>(1.0);
    auto fs_theta = std::make_shared<double>(0.0);
    auto fs_weight = std::make_shared<std::string>();
    auto fs_count = std::make_shared<int>(4);
    fs->add_option("--p", *fs_p, "outer exponent");
    fs->add_option("--q", *fs_q, "inner exponent");
    fs->add_option("--s", *fs_s, "maximal exponent");
    fs->add_option("--theta", *fs_theta, "growth exponent");
    fs->add_option("--weight", *fs_weight, "weight JSON");
    fs->add_option("--functions", *fs_count, "family size");
    fs->callback([&, fs_p, fs_q, fs_s, fs_theta, fs_weight, fs_count] {
      action = [&, fs_p, fs_q, fs_s, fs_theta, fs_weight, fs_count] {
        Weight w = load_weight(*fs_weight);
        Rng rng(g.seed == 0 ? 1 : g.seed);
        std::vector<double> cuts;
        for (int i = 0; i <= 64; ++i) cuts.push_back(-4.0 + 0.125 * i);
        std::vector<GridFunction> fns;
        for (int k = 0; k < *fs_count; ++k) {
          std::vector<double> vals(cuts.size() - 1);
          for (double& v : vals) v = std::fabs(rng.normal());
          fns.emplace_back(cuts, std::move(vals));
        }
        CubeFamily family;
        family.side_exp_min = -3;
        family.side_exp_max = 3;
        FeffermanSteinReport rep =
            fefferman_stein_probe(fns, *fs_p, *fs_q, *fs_s, *fs_theta, w, family);
        JsonValue doc = JsonValue::object();
        doc.set("ratio", rep.ratio);
        doc.set("numerator", rep.numerator);
        doc.set("denominator", rep.denominator);
        doc.set("pass", std::isfinite(rep.ratio) && rep.ratio > 0.0);
        doc.set("config", base_config(g));
        emit(g, std::move(doc));
      };
    });

    auto* pt = diag_cmd->add_subcommand("peetre", "tile maximal inequality probe");
    auto pt_j = std::make_shared<int>(2);
    auto pt_sigma = std::make_shared<double>(3.0);
    auto pt_s = std::make_shared<double>(1.0);
    auto pt_theta = std::make_shared<double>(0.0);
    pt->add_option("--j", *pt_j, "level");
    pt->add_option("--sigma", *pt_sigma, "decay exponent");
    pt->add_option("--s", *pt_s, "maximal exponent");
    pt->add_option("--theta", *pt_theta, "growth exponent");
    pt->callback([&, pt_j, pt_sigma, pt_s, pt_theta] {
      action = [&, pt_j, pt_sigma, pt_s, pt_theta] {
        TileGrid grid = build_grid(kDefaultN, kDefaultDeltaStar, *pt_j, true);
        GeometryReport geo = verify_geometry(grid);
        Rng rng(g.seed == 0 ? 1 : g.seed);
        std::size_t m = static_cast<std::size_t>(grid.level(*pt_j).axis_count());
        std::vector<double> a(m);
        for (double& v : a) v = std::fabs(rng.normal());
        std::vector<double> samples;
        for (int i = 0; i <= 40; ++i)
          samples.push_back(-6.0 + 12.0 * i / 40.0);
        PeetreReport rep = peetre_probe(grid, *pt_j, a, *pt_sigma, *pt_s, *pt_theta,
                                        samples, 2.0 * geo.c4);
        JsonValue doc = JsonValue::object();
        doc.set("j", *pt_j);
        doc.set("sigma", *pt_sigma);
        doc.set("max_ratio", rep.max_ratio);
        doc.set("pass", std::isfinite(rep.max_ratio));
        doc.set("config", base_config(g));
        emit(g, std::move(doc));
      };
    });

    auto* pp = diag_cmd->add_subcommand("plancherel-polya", "sampling inequality probe");
    auto pp_j = std::make_shared<int>(2);
    auto pp_p = std::make_shared<double>(2.0);
    auto pp_weight = std::make_shared<std::string>();
    pp->add_option("--j", *pp_j, "level");
    pp->add_option("--p", *pp_p, "exponent");
    pp->add_option("--weight", *pp_weight, "weight JSON");
    pp->callback([&, pp_j, pp_p, pp_weight] {
      action = [&, pp_j, pp_p, pp_weight] {
        Weight w = load_weight(*pp_weight);
        TileGrid grid = build_grid(kDefaultN, kDefaultDeltaStar, *pp_j, true);
        int degree = static_cast<int>(std::ldexp(1.0, 2 * *pp_j));
        HermiteExpansion gfun = random_expansion(1, degree, g.seed == 0 ? 1 : g.seed);
        PlancherelPolyaReport rep = plancherel_polya_probe(grid, *pp_j, gfun, *pp_p, w);
        JsonValue doc = JsonValue::object();
        doc.set("j", *pp_j);
        doc.set("p", *pp_p);
        doc.set("ratio", rep.ratio);
        doc.set("numerator", rep.numerator);
        doc.set("denominator", rep.denominator);
        doc.set("pass", std::isfinite(rep.ratio) && rep.ratio > 0.0);
        doc.set("config", base_config(g));
        emit(g, std::move(doc));
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    par::set_max_threads(g.threads);
    if (action) action();
    return 0;
  } catch (const validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const resource_error& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 2;
  } catch (const convergence_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
