#pragma once

// Dyadic spectral multiplier systems for the harmonic oscillator: a smooth
// partition of unity {phi_j} on [0, inf) built from a mollifier smoothstep,
// its exact dual {psi_j = phi_j / sum_k phi_k^2}, operators phi_j(sqrt(L))
// in coefficient space and as kernels, and numeric decay diagnostics.
//
// Construction: a C-infinity cut u with u = 1 on [0, 1/2], supp u in [0, 1];
// phi_0 = u and phi_j(x) = u(2^{-j} x) - u(2^{1-j} x) for j >= 1. The sum
// over j telescopes to 1 and phi_j is a dilate of phi_1 for every j >= 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include <json.hpp>

#include "hermlet/errors.hpp"
#include "hermlet/expansion.hpp"
#include "hermlet/hermite.hpp"
#include "hermlet/report.hpp"

namespace hermlet {

/// C-infinity step rising from 0 at s<=0 to 1 at s>=1, built from the
/// e^{-k/s} mollifier. Smaller sharpness gives a flatter transition and
/// larger values near the ends.
struct SmoothStep {
  double sharpness = 0.5;

  double operator()(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    double g = sharpness * (1.0 / s - 1.0 / (1.0 - s));
    if (g > 700.0) return 0.0;
    if (g < -700.0) return 1.0;
    return 1.0 / (1.0 + std::exp(g));
  }

  double derivative(double s) const {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    double g = sharpness * (1.0 / s - 1.0 / (1.0 - s));
    if (std::fabs(g) > 700.0) return 0.0;
    double E = std::exp(g);
    double gp = sharpness * (-1.0 / (s * s) - 1.0 / ((1.0 - s) * (1.0 - s)));
    double denom = (1.0 + E) * (1.0 + E);
    return -E * gp / denom;
  }
};

struct Band {
  double lo = 0.0, hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct LowerBoundCertificate {
  Band band;
  double constant = 0.0;
};

class MultiplierSystem {
 public:
  enum class Kind { partition, dual };

  static constexpr double kDefaultCFloor = 0.05;
  static constexpr double kDefaultTransition = 0.5;

  /// Builds the telescoping partition system. Verifies on a dense sample
  /// that every per-scale lower bound holds with constant >= c_floor.
  static MultiplierSystem partition(double c_floor = kDefaultCFloor,
                                    double transition = kDefaultTransition) {
    require(c_floor > 0.0 && c_floor <= 0.05,
            "build_partition_system: c_floor must lie in (0, 0.05]");
    require(transition > 0.0, "build_partition_system: transition order must be positive");
    MultiplierSystem sys;
    sys.kind_ = Kind::partition;
    sys.c_floor_ = c_floor;
    sys.transition_ = transition;
    sys.certify_lower_bounds();
    return sys;
  }

  /// psi_j = phi_j / G with G = sum_k phi_k^2. Requires a certified positive
  /// lower bound for G on a dense sample (G is scale-periodic above 1, so
  /// sampling [0, 4] covers all of [0, inf)).
  MultiplierSystem dual(double g_floor = 0.2) const {
    require(kind_ == Kind::partition, "dual_system: base must be a partition system");
    double gmin = 2.0;
    const int samples = 40001;
    for (int i = 0; i <= samples; ++i) {
      double lam = 4.0 * static_cast<double>(i) / samples;
      gmin = std::min(gmin, partition_gsum(lam));
    }
    if (!(gmin >= g_floor)) {
      throw validation_error("dual_system: could not certify a positive lower bound for G");
    }
    MultiplierSystem d = *this;
    d.kind_ = Kind::dual;
    d.g_min_ = gmin;
    return d;
  }

  Kind kind() const { return kind_; }
  double c_floor() const { return c_floor_; }
  double transition() const { return transition_; }
  double certified_g_min() const { return g_min_; }

  /// Partition profiles are dilates of one pair (phi_j(x) = phi_1(2^{1-j} x)
  /// for j >= 1); the dual divides by the scale sum and is per-scale.
  bool dilate_generated() const { return kind_ == Kind::partition; }

  /// Support band of phi_j: [0, 1] for j = 0, [2^{j-2}, 2^j] for j >= 1.
  static Band band(int j) {
    require(j >= 0, "band: scale must be nonnegative");
    if (j == 0) return {0.0, 1.0};
    return {std::ldexp(1.0, j - 2), std::ldexp(1.0, j)};
  }

  /// Sub-band where |phi_j| is certified to stay above c_floor.
  static Band certificate_band(int j) {
    require(j >= 0, "certificate_band: scale must be nonnegative");
    if (j == 0) return {0.0, std::exp2(-1.75)};
    return {std::ldexp(std::exp2(-0.75), j - 1), std::ldexp(std::exp2(0.75), j - 1)};
  }

  LowerBoundCertificate certificate(int j) const {
    Band b = certificate_band(j);
    double c = sampled_band_min(j, b);
    return {b, c};
  }

  double eval(int j, double lambda) const {
    double v = eval_partition(j, lambda);
    if (kind_ == Kind::dual && v != 0.0) v /= partition_gsum(lambda);
    return v;
  }

  /// d^order/dlambda^order of phi_j (dual profiles use finite differences).
  double derivative(int j, double lambda, int order) const {
    require(order >= 0, "derivative: order must be nonnegative");
    if (order == 0) return eval(j, lambda);
    if (order == 1 && kind_ == Kind::partition) return partition_derivative(j, lambda);
    double h = 1e-5 * (1.0 + std::fabs(lambda));
    return (derivative(j, lambda + h, order - 1) - derivative(j, lambda - h, order - 1)) /
           (2.0 * h);
  }

  /// G(lambda) = sum_k phi_k(lambda)^2 for the underlying partition system.
  double partition_gsum(double lambda) const {
    if (lambda < 0.0) return 0.0;
    double g = 0.0;
    int jlo = 0, jhi = 2;
    if (lambda > 1.0) {
      int l = static_cast<int>(std::floor(std::log2(lambda)));
      jlo = std::max(0, l - 1);
      jhi = l + 3;
    }
    for (int j = jlo; j <= jhi; ++j) {
      double v = eval_partition(j, lambda);
      g += v * v;
    }
    return g;
  }

  JsonValue to_json(int bands_listed = 10) const {
    JsonValue doc = JsonValue::object();
    doc.set("kind", kind_ == Kind::partition ? "partition" : "dual");
    doc.set("c_floor", c_floor_);
    doc.set("transition", transition_);
    JsonValue bands = JsonValue::array();
    for (int j = 0; j <= bands_listed; ++j) {
      JsonValue b = JsonValue::array();
      b.push(band(j).lo);
      b.push(band(j).hi);
      bands.push(std::move(b));
    }
    doc.set("bands", std::move(bands));
    return doc;
  }

  static MultiplierSystem from_json(const nlohmann::json& j) {
    require(j.is_object(), "multiplier system: JSON root must be an object");
    require(j.contains("kind") && j["kind"].is_string(),
            "multiplier system: missing string 'kind'");
    std::string kind = j["kind"].get<std::string>();
    require(kind == "partition" || kind == "dual",
            "multiplier system: kind must be 'partition' or 'dual'");
    double c_floor = j.contains("c_floor") ? j["c_floor"].get<double>() : kDefaultCFloor;
    double transition =
        j.contains("transition") ? j["transition"].get<double>() : kDefaultTransition;
    MultiplierSystem base = partition(c_floor, transition);
    return kind == "partition" ? base : base.dual();
  }

 private:
  Kind kind_ = Kind::partition;
  double c_floor_ = kDefaultCFloor;
  double transition_ = kDefaultTransition;
  double g_min_ = 0.0;

  // u(x): 1 on [0, 1/2], 0 on [1, inf), smooth fall in between.
  double cut(double x) const {
    if (x <= 0.5) return 1.0;
    if (x >= 1.0) return 0.0;
    return 1.0 - SmoothStep{transition_}(2.0 * x - 1.0);
  }

  double cut_derivative(double x) const {
    if (x <= 0.5 || x >= 1.0) return 0.0;
    return -2.0 * SmoothStep{transition_}.derivative(2.0 * x - 1.0);
  }

  double eval_partition(int j, double lambda) const {
    require(j >= 0, "multiplier: scale must be nonnegative");
    if (lambda < 0.0) return 0.0;
    if (j == 0) return cut(lambda);
    double s = std::ldexp(lambda, -j);
    return cut(s) - cut(2.0 * s);
  }

  double partition_derivative(int j, double lambda) const {
    if (lambda < 0.0) return 0.0;
    if (j == 0) return cut_derivative(lambda);
    double s = std::ldexp(lambda, -j);
    double sc = std::ldexp(1.0, -j);
    return cut_derivative(s) * sc - cut_derivative(2.0 * s) * 2.0 * sc;
  }

  double sampled_band_min(int j, Band b) const {
    const int samples = 4000;
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= samples; ++i) {
      double lam = b.lo + (b.hi - b.lo) * static_cast<double>(i) / samples;
      lo = std::min(lo, std::fabs(eval(j, lam)));
    }
    return lo;
  }

  void certify_lower_bounds() const {
    // phi_j is a dilate of phi_1 for j >= 1, so scales 0 and 1 decide all.
    for (int j : {0, 1}) {
      Band b = certificate_band(j);
      double c = sampled_band_min(j, b);
      if (!(c >= c_floor_)) {
        throw validation_error(
            "build_partition_system: calibration failure, lower bound " +
            std::to_string(c) + " < c_floor at scale " + std::to_string(j));
      }
    }
  }
};

/// Free-function spelling of the two builders.
inline MultiplierSystem build_partition_system(
    double c_floor = MultiplierSystem::kDefaultCFloor,
    double transition = MultiplierSystem::kDefaultTransition) {
  return MultiplierSystem::partition(c_floor, transition);
}

inline MultiplierSystem dual_system(const MultiplierSystem& phi, double g_floor = 0.2) {
  return phi.dual(g_floor);
}

/// Degrees k with sqrt(2k+n) inside the support band of phi_j. Everything
/// outside evaluates to exactly zero.
struct SupportIndexSet {
  int scale = 0;
  int dim = 1;
  std::int64_t k_min = 0;
  std::int64_t k_max = -1;  // empty when k_max < k_min

  bool empty() const { return k_max < k_min; }
  std::int64_t count() const { return empty() ? 0 : k_max - k_min + 1; }
  bool contains(std::int64_t k) const { return k >= k_min && k <= k_max; }
};

inline SupportIndexSet support_index_set(const MultiplierSystem& sys, int j, int n) {
  (void)sys;
  require(n >= 1, "support_index_set: dimension must be positive");
  Band b = MultiplierSystem::band(j);
  double lo2 = b.lo * b.lo, hi2 = b.hi * b.hi;
  std::int64_t k_min =
      static_cast<std::int64_t>(std::ceil((lo2 - static_cast<double>(n)) / 2.0 - 1e-12));
  if (k_min < 0) k_min = 0;
  std::int64_t k_max =
      static_cast<std::int64_t>(std::floor((hi2 - static_cast<double>(n)) / 2.0 + 1e-12));
  return {j, n, k_min, k_max};
}

/// Coefficient-space action of phi_j(sqrt(L)): c_xi -> phi_j(sqrt(2|xi|+n)) c_xi,
/// with coefficients outside the support set zeroed bit-exactly.
inline HermiteExpansion apply_multiplier(const MultiplierSystem& sys, int j,
                                         const HermiteExpansion& f) {
  HermiteExpansion out(f.dim(), f.max_degree());
  SupportIndexSet is = support_index_set(sys, j, f.dim());
  if (is.empty()) return out;
  std::int64_t k_hi = std::min<std::int64_t>(is.k_max, f.max_degree());
  for (std::int64_t k = is.k_min; k <= k_hi; ++k) {
    double factor = sys.eval(j, std::sqrt(eigenvalue(k, f.dim())));
    if (factor == 0.0) continue;
    std::size_t b = f.degree_offset(static_cast<int>(k));
    std::size_t e = b + f.degree_size(static_cast<int>(k));
    for (std::size_t i = b; i < e; ++i) out.at_flat(i) = factor * f.at_flat(i);
  }
  return out;
}

/// Kernel of phi_j(sqrt(L)): sum over k in the support set of
/// phi_j(sqrt(2k+n)) P_k(x, y).
inline double multiplier_kernel(const MultiplierSystem& sys, int j,
                                std::span<const double> x, std::span<const double> y,
                                const KernelOptions& opt = {}) {
  detail::check_point_dims(x, y);
  int n = static_cast<int>(x.size());
  SupportIndexSet is = support_index_set(sys, j, n);
  if (is.empty()) return 0.0;
  int k_max = static_cast<int>(is.k_max);
  detail::check_term_cap(simplex_size(n, k_max), opt);
  RecurrenceCoeffs c = recurrence_coeffs(k_max);
  std::vector<std::vector<double>> hx(x.size()), hy(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    hx[d].resize(static_cast<std::size_t>(k_max) + 1);
    hy[d].resize(static_cast<std::size_t>(k_max) + 1);
    hermite_values_into(k_max, x[d], c, hx[d]);
    hermite_values_into(k_max, y[d], c, hy[d]);
  }
  double sum = 0.0;
  for (std::int64_t k = is.k_min; k <= is.k_max; ++k) {
    double factor = sys.eval(j, std::sqrt(eigenvalue(k, n)));
    if (factor == 0.0) continue;
    double pk = 0.0;
    for_each_composition(static_cast<int>(k), n, [&](std::span<const int> xi) {
      double term = 1.0;
      for (std::size_t d = 0; d < xi.size(); ++d) {
        std::size_t deg = static_cast<std::size_t>(xi[d]);
        term *= hx[d][deg] * hy[d][deg];
      }
      pk += term;
    });
    sum += factor * pk;
  }
  return sum;
}

/// Signed log-magnitude of the 1-D kernel; survives double underflow in the
/// Gaussian tail. sign = 0 means an exact zero.
struct SignedLog {
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;

  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

inline SignedLog multiplier_kernel_log1d(const MultiplierSystem& sys, int j, double x,
                                         double y) {
  SupportIndexSet is = support_index_set(sys, j, 1);
  if (is.empty()) return {};
  int k_max = static_cast<int>(is.k_max);
  RecurrenceCoeffs c = recurrence_coeffs(k_max);
  // Per-degree scaled tables.
  auto table = [&](double t, std::vector<double>& mant, std::vector<long>& ex) {
    mant.resize(static_cast<std::size_t>(k_max) + 1);
    ex.resize(static_cast<std::size_t>(k_max) + 1);
    double prev = 0.0, cur;
    long e;
    detail::scaled_h0(t, cur, e);
    mant[0] = cur;
    ex[0] = e;
    // Tighter mantissa window than the generic recurrence so products of two
    // table entries stay inside double range.
    constexpr double hi_lim = 0x1p+250, lo_lim = 0x1p-250;
    for (int k = 0; k < k_max; ++k) {
      double next = t * c.a[static_cast<std::size_t>(k)] * cur -
                    c.b[static_cast<std::size_t>(k)] * prev;
      prev = cur;
      cur = next;
      double mag = std::fabs(cur) > std::fabs(prev) ? std::fabs(cur) : std::fabs(prev);
      if (mag > hi_lim) {
        prev *= lo_lim;
        cur *= lo_lim;
        e += 250;
      } else if (mag > 0.0 && mag < lo_lim) {
        prev *= hi_lim;
        cur *= hi_lim;
        e -= 250;
      }
      mant[static_cast<std::size_t>(k) + 1] = cur;
      ex[static_cast<std::size_t>(k) + 1] = e;
    }
  };
  std::vector<double> mx, my;
  std::vector<long> ex, ey;
  table(x, mx, ex);
  table(y, my, ey);
  double S = 0.0;
  long es = 0;
  bool first = true;
  for (std::int64_t k = is.k_min; k <= is.k_max; ++k) {
    double factor = sys.eval(j, std::sqrt(eigenvalue(k, 1)));
    if (factor == 0.0) continue;
    std::size_t kk = static_cast<std::size_t>(k);
    double m = factor * mx[kk] * my[kk];
    long e = ex[kk] + ey[kk];
    if (m == 0.0) continue;
    if (first) {
      S = m;
      es = e;
      first = false;
      continue;
    }
    long diff = e - es;
    if (diff > 80) {  // new term dominates; rebase
      S = std::ldexp(S, static_cast<int>(std::max<long>(-1000, -diff))) + m;
      es = e;
    } else {
      S += std::ldexp(m, static_cast<int>(std::max<long>(-1000, diff)));
    }
    double mag = std::fabs(S);
    if (mag > detail::kRescaleHi) {
      S *= detail::kRescaleLo;
      es += 500;
    } else if (mag > 0.0 && mag < detail::kRescaleLo) {
      S *= detail::kRescaleHi;
      es -= 500;
    }
  }
  if (S == 0.0) return {};
  return {std::log(std::fabs(S)) + static_cast<double>(es) * std::numbers::ln2,
          S > 0.0 ? 1 : -1};
}

/// Fits the cutoff-envelope pair (C, theta) for the polynomial-decay bound.
/// C is the near-field sup of |K| (1 + 2^j |x-y|)^N / 2^{jn}; theta is the
/// largest Gaussian rate the far field certifies at this constant (the
/// binding far point determines it), so with the reported pair the bound
/// holds at every grid point. A plain least-squares rate over the far field
/// is reported alongside for reference; it is far noisier because residuals
/// get multiplied by e^{theta q} at q of order 4^j.
struct KernelDecayReport {
  int scale = 0;
  int decay_order = 0;
  double epsilon = 5.0;
  double theta_fit = 0.0;      // certified far-field rate
  double c_fit = 0.0;          // smallest C making the bound hold on the grid
  double theta_lsq = 0.0;      // least-squares far-field rate (diagnostic)
  double max_violation = 0.0;  // sup ratio with the reported pair (== 1 at the binding point)
  std::size_t points = 0;
  std::size_t far_points = 0;
};

/// Structured evaluation pairs for the decay diagnostic: a near-diagonal
/// family with offsets scaled by 2^{-j} (kept inside the oscillatory region,
/// so corresponding pairs are self-similar across scales) plus far-field
/// probes straddling the Gaussian cutoff. About 200 pairs.
inline std::vector<std::pair<double, double>> kernel_decay_grid(int j, double epsilon) {
  double p2j = std::ldexp(1.0, j);  // sqrt of the largest eigenvalue in band j
  std::vector<std::pair<double, double>> pairs;
  const double ss[] = {-0.7, -0.55, -0.4, -0.25, -0.1, 0.1, 0.2, 0.3, 0.4, 0.55, 0.7};
  const double ds[] = {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.5, 6.0};
  for (double s : ss)
    for (double d : ds) {
      double x = s * p2j;
      double y = x + d / p2j;
      if (std::fabs(y) <= 0.9 * p2j) pairs.emplace_back(x, y);
    }
  double cut = std::sqrt(epsilon) * p2j;
  const double ts[] = {1.01, 1.05, 1.1, 1.2, 1.3};
  const double ys[] = {0.0, -0.25, 0.25, 0.5, -0.5, 0.7, -0.7, 0.4, -0.4, 0.1};
  for (double t : ts) {
    for (double yy : ys) pairs.emplace_back(t * cut, yy * p2j);
    for (double t2 : ts) pairs.emplace_back(t * cut, -t2 * cut);
  }
  return pairs;
}

inline KernelDecayReport kernel_decay_diagnostic(
    const MultiplierSystem& sys, int j, int decay_order, double epsilon,
    std::span<const std::pair<double, double>> pairs) {
  require(decay_order >= 1, "kernel_decay_diagnostic: decay order must be >= 1");
  require(epsilon > 4.0, "kernel_decay_diagnostic: epsilon must exceed 4");
  KernelDecayReport rep;
  rep.scale = j;
  rep.decay_order = decay_order;
  rep.epsilon = epsilon;
  double cutoff2 = epsilon * std::ldexp(1.0, 2 * j);
  double pow2j = std::ldexp(1.0, j);
  struct Pt {
    double log_abs, base, q;
  };
  std::vector<Pt> pts;
  for (auto [x, y] : pairs) {
    SignedLog k = multiplier_kernel_log1d(sys, j, x, y);
    if (k.sign == 0) continue;
    double base = std::numbers::ln2 * j -  // 2^{jn} with n = 1
                  decay_order * std::log1p(pow2j * std::fabs(x - y));
    double q = (x * x >= cutoff2 ? x * x : 0.0) + (y * y >= cutoff2 ? y * y : 0.0);
    pts.push_back({k.log_abs, base, q});
  }
  rep.points = pts.size();
  // near-field constant
  double logc = -std::numeric_limits<double>::infinity();
  for (const Pt& p : pts)
    if (p.q == 0.0) logc = std::max(logc, p.log_abs - p.base);
  if (!std::isfinite(logc)) logc = 0.0;
  // certified rate: binding far point at this constant
  double theta = std::numeric_limits<double>::infinity();
  double sq = 0.0, sqq = 0.0, sr = 0.0, sqr = 0.0;
  std::size_t nf = 0;
  for (const Pt& p : pts) {
    if (p.q <= 0.0) continue;
    theta = std::min(theta, (logc + p.base - p.log_abs) / p.q);
    double r = p.log_abs - p.base;
    sq += p.q;
    sqq += p.q * p.q;
    sr += r;
    sqr += p.q * r;
    ++nf;
  }
  rep.far_points = nf;
  if (!std::isfinite(theta) || theta < 0.0) theta = 0.0;
  rep.theta_fit = theta;
  if (nf >= 2) {
    double det = static_cast<double>(nf) * sqq - sq * sq;
    if (std::fabs(det) > 1e-12 * (1.0 + sqq))
      rep.theta_lsq = -(static_cast<double>(nf) * sqr - sq * sr) / det;
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (const Pt& p : pts)
    worst = std::max(worst, p.log_abs - p.base + theta * p.q);
  rep.c_fit = std::exp(worst);
  rep.max_violation = std::exp(worst - logc);
  return rep;
}

/// Max absolute value over the grid of the composed kernel of
/// phiA_j(sqrt(L)) phiB_k(sqrt(L)), composed in coefficient space.
struct OrthogonalityReport {
  double max_abs = 0.0;
  bool empty_intersection = false;
};

inline OrthogonalityReport orthogonality_check(const MultiplierSystem& sys_a,
                                               const MultiplierSystem& sys_b, int j, int k,
                                               std::span<const double> xs,
                                               std::span<const double> ys, int n = 1) {
  SupportIndexSet ia = support_index_set(sys_a, j, n);
  SupportIndexSet ib = support_index_set(sys_b, k, n);
  std::int64_t lo = std::max(ia.k_min, ib.k_min);
  std::int64_t hi = std::min(ia.k_max, ib.k_max);
  if (lo > hi) return {0.0, true};
  int k_max = static_cast<int>(hi);
  RecurrenceCoeffs c = recurrence_coeffs(k_max);
  std::vector<double> mult(static_cast<std::size_t>(hi - lo) + 1);
  bool all_zero = true;
  for (std::int64_t d = lo; d <= hi; ++d) {
    double lam = std::sqrt(eigenvalue(d, n));
    mult[static_cast<std::size_t>(d - lo)] = sys_a.eval(j, lam) * sys_b.eval(k, lam);
    if (mult[static_cast<std::size_t>(d - lo)] != 0.0) all_zero = false;
  }
  if (all_zero) return {0.0, false};
  require(n == 1, "orthogonality_check: kernel grid evaluation supports n = 1");
  OrthogonalityReport rep;
  std::vector<double> hx(static_cast<std::size_t>(k_max) + 1),
      hy(static_cast<std::size_t>(k_max) + 1);
  for (double x : xs) {
    hermite_values_into(k_max, x, c, hx);
    for (double y : ys) {
      hermite_values_into(k_max, y, c, hy);
      double sum = 0.0;
      for (std::int64_t d = lo; d <= hi; ++d) {
        double m = mult[static_cast<std::size_t>(d - lo)];
        if (m == 0.0) continue;
        sum += m * hx[static_cast<std::size_t>(d)] * hy[static_cast<std::size_t>(d)];
      }
      rep.max_abs = std::max(rep.max_abs, std::fabs(sum));
    }
  }
  return rep;
}

}  // namespace hermlet
