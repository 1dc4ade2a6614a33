#pragma once

// Weight families and masses, critical-radius geometry, the growth-class
// certificate, and the discrete maximal operator over a declared cube
// family. Masses use closed forms where the family admits one and adaptive
// Gauss-Legendre panels otherwise; scans that must survive Gaussian-tail
// underflow go through log_mass.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <json.hpp>

#include "hermlet/errors.hpp"
#include "hermlet/report.hpp"
#include "hermlet/rng.hpp"

namespace hermlet {

inline constexpr double kSqrtPi = 1.7724538509055160273;

inline double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

inline double norm_2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

/// rho(x) = 1 / (1 + |x|_inf), the locality scale of the oscillator.
inline double critical_radius(std::span<const double> x) {
  return 1.0 / (1.0 + norm_inf(x));
}

/// Cube Q(x, r) = {y : |x - y|_inf < r}; sidelength 2r.
struct CubeSpec {
  std::vector<double> center;
  double half = 0.0;

  double side() const { return 2.0 * half; }
  double volume(int n) const { return std::pow(side(), n); }
};

/// Psi_theta(Q) = (1 + side(Q) / rho(center))^theta.
inline double psi_factor(const CubeSpec& q, double theta) {
  require(theta >= 0.0, "psi_factor: theta must be nonnegative");
  require(q.half > 0.0, "psi_factor: cube halfwidth must be positive");
  return std::pow(1.0 + q.side() / critical_radius(q.center), theta);
}

struct BoxSpec {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const {
    double v = 1.0;
    for (std::size_t d = 0; d < lo.size(); ++d) v *= hi[d] - lo[d];
    return v;
  }
  static BoxSpec from_cube(const CubeSpec& q) {
    BoxSpec b;
    for (double c : q.center) {
      b.lo.push_back(c - q.half);
      b.hi.push_back(c + q.half);
    }
    return b;
  }
};

namespace quad {

// 15-point Gauss-Legendre on [-1, 1].
inline constexpr double kGlNodes[15] = {
    -0.98799251802048543, -0.93727339240070590, -0.84820658341042722,
    -0.72441773136017005, -0.57097217260853885, -0.39415134707756337,
    -0.20119409399743452, 0.0,                  0.20119409399743452,
    0.39415134707756337,  0.57097217260853885,  0.72441773136017005,
    0.84820658341042722,  0.93727339240070590,  0.98799251802048543};
inline constexpr double kGlWeights[15] = {
    0.030753241996117268, 0.070366047488108124, 0.107159220467171935,
    0.139570677926154314, 0.166269205816993934, 0.186161000015562211,
    0.198431485327111576, 0.202578241925561273, 0.198431485327111576,
    0.186161000015562211, 0.166269205816993934, 0.139570677926154314,
    0.107159220467171935, 0.070366047488108124, 0.030753241996117268};

template <class Fn>
double gl15(const Fn& f, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 15; ++i) s += kGlWeights[i] * f(mid + half * kGlNodes[i]);
  return s * half;
}

/// Adaptive panel integration: a panel is accepted when splitting it changes
/// the estimate by less than the tolerance share.
template <class Fn>
double adaptive(const Fn& f, double a, double b, double rel_tol = 1e-8,
                int max_panels = 100000) {
  struct Seg {
    double a, b, whole;
  };
  double whole = gl15(f, a, b);
  if (!std::isfinite(whole)) return whole;
  std::vector<Seg> stack{{a, b, whole}};
  double total = 0.0;
  int panels = 0;
  double scale = std::fabs(whole) + 1e-300;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    if (++panels > max_panels)
      throw convergence_error("adaptive quadrature: panel cap exceeded");
    double mid = 0.5 * (s.a + s.b);
    double left = gl15(f, s.a, mid), right = gl15(f, mid, s.b);
    double split = left + right;
    scale = std::max(scale, std::fabs(split));
    if (std::fabs(split - s.whole) <= rel_tol * scale * 0.5 ||
        (s.b - s.a) < 1e-14 * (1.0 + std::fabs(s.a))) {
      total += split;
    } else {
      stack.push_back({s.a, mid, left});
      stack.push_back({mid, s.b, right});
    }
  }
  return total;
}

/// Scaled complementary error function erfc(z) e^{z^2} for z >= 0.
inline double erfcx(double z) {
  if (z < 20.0) return std::erfc(z) * std::exp(z * z);
  double iz2 = 1.0 / (z * z);
  double series = 1.0 + iz2 * (-0.5 + iz2 * (0.75 + iz2 * (-1.875 + iz2 * 6.5625)));
  return series / (z * kSqrtPi);
}

/// log of integral_a^b e^{-c x^2} dx for c > 0, stable far in the tail.
inline double log_gaussian_mass_1d(double a, double b, double c) {
  double s = std::sqrt(c);
  double sa = s * a, sb = s * b;
  if (sa > sb) std::swap(sa, sb);
  double front = std::log(kSqrtPi / (2.0 * s));
  if (sa >= 0.0) {  // positive tail
    double diff = erfcx(sa) - erfcx(sb) * std::exp(-(sb * sb - sa * sa));
    return front - sa * sa + std::log(diff);
  }
  if (sb <= 0.0) return log_gaussian_mass_1d(-b, -a, c);
  // straddles zero; no underflow possible
  return front + std::log(std::erf(sb) - std::erf(sa));
}

}  // namespace quad

enum class WeightFamily { constant, power, gaussian, table };

/// A weight function handle: analytic family or tabulated, with mass
/// evaluation and declared class metadata.
class Weight {
 public:
  static Weight constant(double value) {
    require(value >= 0.0, "weight: constant must be nonnegative");
    Weight w;
    w.family_ = WeightFamily::constant;
    w.value_ = value;
    return w;
  }

  /// w(x) = |x|^epsilon (Euclidean norm); locally integrable needs eps > -n.
  static Weight power(double epsilon) {
    Weight w;
    w.family_ = WeightFamily::power;
    w.epsilon_ = epsilon;
    return w;
  }

  /// w(x) = e^{sign * epsilon * |x|^2}.
  static Weight gaussian(double epsilon, int sign) {
    require(epsilon > 0.0, "weight: gaussian epsilon must be positive");
    require(sign == 1 || sign == -1, "weight: gaussian sign must be +-1");
    Weight w;
    w.family_ = WeightFamily::gaussian;
    w.epsilon_ = epsilon;
    w.sign_ = sign;
    return w;
  }

  /// Piecewise-linear 1-D table on a strictly increasing grid; zero outside.
  static Weight table(std::vector<double> grid, std::vector<double> values) {
    require(grid.size() >= 2 && grid.size() == values.size(),
            "weight: table needs matching grid/values with >= 2 points");
    for (std::size_t i = 1; i < grid.size(); ++i)
      require(grid[i] > grid[i - 1], "weight: table grid must be strictly increasing");
    for (double v : values) require(v >= 0.0, "weight: table values must be nonnegative");
    Weight w;
    w.family_ = WeightFamily::table;
    w.grid_ = std::move(grid);
    w.values_ = std::move(values);
    return w;
  }

  WeightFamily family() const { return family_; }
  double epsilon() const { return epsilon_; }
  int sign() const { return sign_; }
  double constant_value() const { return value_; }
  const std::vector<double>& table_grid() const { return grid_; }
  const std::vector<double>& table_values() const { return values_; }

  double declared_rw() const { return r_w_; }
  void declare_rw(double r) {
    require(r >= 1.0, "weight: declared r_w must be >= 1");
    r_w_ = r;
  }

  bool locally_bounded() const {
    return !(family_ == WeightFamily::power && epsilon_ < 0.0);
  }

  double operator()(std::span<const double> x) const {
    switch (family_) {
      case WeightFamily::constant:
        return value_;
      case WeightFamily::power: {
        double r = norm_2(x);
        if (r == 0.0) return epsilon_ > 0.0 ? 0.0
                       : epsilon_ == 0.0   ? 1.0
                                           : std::numeric_limits<double>::infinity();
        return std::pow(r, epsilon_);
      }
      case WeightFamily::gaussian: {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return std::exp(sign_ * epsilon_ * r2);
      }
      case WeightFamily::table: {
        require(x.size() == 1, "weight: table family is one-dimensional");
        double t = x[0];
        if (t < grid_.front() || t > grid_.back()) return 0.0;
        auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
        std::size_t i = static_cast<std::size_t>(
            std::max<std::ptrdiff_t>(1, it - grid_.begin())) - 1;
        if (i >= grid_.size() - 1) i = grid_.size() - 2;
        double f = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
        return values_[i] + f * (values_[i + 1] - values_[i]);
      }
    }
    return 0.0;
  }

  /// w^{power} as a weight of the same family (table: pointwise).
  Weight pointwise_power(double p) const {
    switch (family_) {
      case WeightFamily::constant:
        return constant(std::pow(value_, p));
      case WeightFamily::power:
        return power(epsilon_ * p);
      case WeightFamily::gaussian: {
        double coeff = sign_ * epsilon_ * p;
        if (coeff == 0.0) return constant(1.0);
        return gaussian(std::fabs(coeff), coeff > 0.0 ? 1 : -1);
      }
      case WeightFamily::table: {
        std::vector<double> v = values_;
        for (double& x : v) x = std::pow(x, p);
        return table(grid_, std::move(v));
      }
    }
    return constant(1.0);
  }

  JsonValue to_json() const {
    JsonValue doc = JsonValue::object();
    JsonValue params = JsonValue::object();
    switch (family_) {
      case WeightFamily::constant:
        doc.set("family", "constant");
        params.set("value", value_);
        break;
      case WeightFamily::power:
        doc.set("family", "power");
        params.set("epsilon", epsilon_);
        break;
      case WeightFamily::gaussian:
        doc.set("family", "gaussian");
        params.set("epsilon", epsilon_);
        params.set("sign", static_cast<std::int64_t>(sign_));
        break;
      case WeightFamily::table:
        doc.set("family", "table");
        params.set("grid", JsonValue::from_doubles(grid_));
        params.set("values", JsonValue::from_doubles(values_));
        break;
    }
    doc.set("params", std::move(params));
    if (r_w_ != 1.0) doc.set("r_w", r_w_);
    return doc;
  }

  static Weight from_json(const nlohmann::json& j) {
    require(j.is_object() && j.contains("family") && j["family"].is_string(),
            "weight: JSON needs a string 'family'");
    std::string fam = j["family"].get<std::string>();
    nlohmann::json params = j.contains("params") ? j["params"] : nlohmann::json::object();
    Weight w = [&]() {
      if (fam == "constant") return constant(params.value("value", 1.0));
      if (fam == "power") return power(params.value("epsilon", 0.0));
      if (fam == "gaussian")
        return gaussian(params.value("epsilon", 1.0), params.value("sign", -1));
      if (fam == "table") {
        require(params.contains("grid") && params.contains("values"),
                "weight: table family needs 'grid' and 'values'");
        return table(params["grid"].get<std::vector<double>>(),
                     params["values"].get<std::vector<double>>());
      }
      throw validation_error("weight: unknown family '" + fam + "'");
    }();
    if (j.contains("r_w")) w.declare_rw(j["r_w"].get<double>());
    return w;
  }

 private:
  WeightFamily family_ = WeightFamily::constant;
  double value_ = 1.0;
  double epsilon_ = 0.0;
  int sign_ = -1;
  std::vector<double> grid_, values_;
  double r_w_ = 1.0;
};

namespace detail {

// int_a^b |x|^eps dx, exact; infinite when the interval hits 0 with eps <= -1.
inline double power_mass_1d(double a, double b, double eps) {
  auto prim = [eps](double t) {
    double ap = std::pow(std::fabs(t), eps + 1.0) / (eps + 1.0);
    return t >= 0.0 ? ap : -ap;
  };
  if (eps <= -1.0 && a <= 0.0 && b >= 0.0)
    return std::numeric_limits<double>::infinity();
  if (eps == -1.0) return std::log(b) - std::log(a);  // same-sign interval
  return prim(b) - prim(a);
}

inline double gaussian_mass_1d(double a, double b, double coeff) {
  if (coeff == 0.0) return b - a;
  if (coeff < 0.0) {
    double s = std::sqrt(-coeff);
    return kSqrtPi / (2.0 * s) * (std::erf(s * b) - std::erf(s * a));
  }
  double peak = std::max(a * a, b * b);
  if (coeff * peak > 690.0) return std::numeric_limits<double>::infinity();
  return quad::adaptive([coeff](double x) { return std::exp(coeff * x * x); }, a, b);
}

}  // namespace detail

/// w(E) = integral of w over the box. Closed forms for constant, gaussian
/// (per-axis products) and 1-D power; adaptive quadrature otherwise.
inline double mass(const Weight& w, const BoxSpec& box) {
  int n = box.dim();
  require(n >= 1 && n <= 2, "mass: boxes supported in dimensions 1 and 2");
  switch (w.family()) {
    case WeightFamily::constant:
      return w.constant_value() * box.volume();
    case WeightFamily::gaussian: {
      double m = 1.0;
      double coeff = w.sign() * w.epsilon();
      for (int d = 0; d < n; ++d)
        m *= detail::gaussian_mass_1d(box.lo[static_cast<std::size_t>(d)],
                                      box.hi[static_cast<std::size_t>(d)], coeff);
      return m;
    }
    case WeightFamily::power: {
      // non-integrable exponents give an infinite mass over regions
      // touching the origin; elsewhere the closed form applies
      if (n == 1) return detail::power_mass_1d(box.lo[0], box.hi[0], w.epsilon());
      double eps = w.epsilon();
      bool touches_origin = box.lo[0] <= 0.0 && box.hi[0] >= 0.0 && box.lo[1] <= 0.0 &&
                            box.hi[1] >= 0.0;
      if (eps <= -2.0 && touches_origin) return std::numeric_limits<double>::infinity();
      auto inner = [&](double y) {
        return quad::adaptive(
            [eps, y](double x) { return std::pow(std::sqrt(x * x + y * y), eps); },
            box.lo[0], box.hi[0], 1e-9, 200000);
      };
      return quad::adaptive(inner, box.lo[1], box.hi[1], 1e-8, 2000);
    }
    case WeightFamily::table: {
      require(n == 1, "mass: table weights are one-dimensional");
      const auto& g = w.table_grid();
      double lo = std::max(box.lo[0], g.front());
      double hi = std::min(box.hi[0], g.back());
      if (hi <= lo) return 0.0;
      double acc = 0.0;
      double p[1];
      auto val = [&](double t) {
        p[0] = t;
        return w(std::span<const double>(p, 1));
      };
      for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        double a = std::max(lo, g[i]), b = std::min(hi, g[i + 1]);
        if (b > a) acc += 0.5 * (val(a) + val(b)) * (b - a);  // exact on linear pieces
      }
      return acc;
    }
  }
  return 0.0;
}

inline double mass(const Weight& w, const CubeSpec& q) {
  return mass(w, BoxSpec::from_cube(q));
}

/// Euclidean-ball mass; interval in 1-D, polar quadrature in 2-D.
inline double mass_ball(const Weight& w, std::span<const double> center, double r) {
  require(r > 0.0, "mass_ball: radius must be positive");
  int n = static_cast<int>(center.size());
  if (n == 1) {
    BoxSpec b;
    b.lo = {center[0] - r};
    b.hi = {center[0] + r};
    return mass(w, b);
  }
  require(n == 2, "mass_ball: supported in dimensions 1 and 2");
  double cx = center[0], cy = center[1];
  auto ring = [&](double rho) {
    auto ang = [&](double th) {
      double p[2] = {cx + rho * std::cos(th), cy + rho * std::sin(th)};
      return w(std::span<const double>(p, 2));
    };
    return rho * quad::adaptive(ang, 0.0, 2.0 * std::numbers::pi, 1e-8, 4000);
  };
  return quad::adaptive(ring, 0.0, r, 1e-8, 4000);
}

/// log w(box), stable when Gaussian-decay masses underflow.
inline double log_mass(const Weight& w, const BoxSpec& box) {
  if (w.family() == WeightFamily::gaussian && w.sign() < 0) {
    double c = w.epsilon();
    double lg = 0.0;
    for (int d = 0; d < box.dim(); ++d)
      lg += quad::log_gaussian_mass_1d(box.lo[static_cast<std::size_t>(d)],
                                       box.hi[static_cast<std::size_t>(d)], c);
    return lg;
  }
  return std::log(mass(w, box));
}

inline double log_mass_ball(const Weight& w, std::span<const double> center, double r) {
  if (center.size() == 1 && w.family() == WeightFamily::gaussian && w.sign() < 0) {
    return quad::log_gaussian_mass_1d(center[0] - r, center[0] + r, w.epsilon());
  }
  return std::log(mass_ball(w, center, r));
}

/// Essential infimum over a box, closed form per family.
inline double ess_inf(const Weight& w, const BoxSpec& box) {
  int n = box.dim();
  auto closest_r2 = [&] {
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) {
      double c = std::clamp(0.0, box.lo[static_cast<std::size_t>(d)], box.hi[static_cast<std::size_t>(d)]);
      r2 += c * c;
    }
    return r2;
  };
  auto farthest_r2 = [&] {
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) {
      double m = std::max(std::fabs(box.lo[static_cast<std::size_t>(d)]),
                          std::fabs(box.hi[static_cast<std::size_t>(d)]));
      r2 += m * m;
    }
    return r2;
  };
  switch (w.family()) {
    case WeightFamily::constant:
      return w.constant_value();
    case WeightFamily::power:
      return w.epsilon() >= 0.0 ? std::pow(closest_r2(), 0.5 * w.epsilon())
                                : std::pow(farthest_r2(), 0.5 * w.epsilon());
    case WeightFamily::gaussian:
      return w.sign() > 0 ? std::exp(w.epsilon() * closest_r2())
                          : std::exp(-w.epsilon() * farthest_r2());
    case WeightFamily::table: {
      require(n == 1, "ess_inf: table weights are one-dimensional");
      double lo = box.lo[0], hi = box.hi[0];
      const auto& g = w.table_grid();
      if (lo < g.front() || hi > g.back()) return 0.0;  // zero outside the table
      double m = std::numeric_limits<double>::infinity();
      double p[1];
      // piecewise-linear: the minimum sits at a knot or a clipped endpoint
      p[0] = lo;
      m = std::min(m, w(std::span<const double>(p, 1)));
      p[0] = hi;
      m = std::min(m, w(std::span<const double>(p, 1)));
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] > lo && g[i] < hi) m = std::min(m, w.table_values()[i]);
      }
      return m;
    }
  }
  return 0.0;
}

/// Scan plan for the growth-class certificate: dyadic sidelengths
/// 2^{-depth}..2^{max_side_exp}, centers on a lattice inside |c|_inf <= x_max.
struct AhpScanPlan {
  int depth = 6;
  int max_side_exp = 2;
  double x_max = 8.0;
  std::uint64_t max_cubes = 2'000'000;
};

struct AhpCertificate {
  double max_ratio = 0.0;
  CubeSpec argmax;
  std::size_t cubes = 0;
  std::size_t counterexamples = 0;  // cubes where w^{1-p'} was non-integrable
};

/// Numeric certificate for the growth class: max over sampled cubes of
///   (avg_Q w)^{1/p} (avg_Q w^{1-p'})^{1/p'} / Psi_eta(Q),     p > 1,
///   (avg_Q w) / (ess_inf_Q w * Psi_eta(Q)),                   p = 1.
/// A finite stable maximum is consistent with membership; never a proof.
inline AhpCertificate ahp_certificate(const Weight& w, double p, double eta, int n = 1,
                                      const AhpScanPlan& plan = {}) {
  require(p >= 1.0, "ahp_certificate: p must be >= 1");
  require(eta >= 0.0, "ahp_certificate: eta must be >= 0");
  require(n >= 1 && n <= 2, "ahp_certificate: dimensions 1 and 2 supported");
  AhpCertificate cert;
  bool dual_ok = true;
  Weight wd = Weight::constant(1.0);
  double pp = 0.0;
  if (p > 1.0) {
    pp = p / (p - 1.0);
    wd = w.pointwise_power(1.0 - pp);
    if (wd.family() == WeightFamily::power && wd.epsilon() <= -n) dual_ok = false;
  }
  for (int t = -plan.depth; t <= plan.max_side_exp; ++t) {
    double side = std::ldexp(1.0, t);
    double half = 0.5 * side;
    double step = half;  // lattice spacing = half sidelength
    std::int64_t kmax = static_cast<std::int64_t>(std::floor(plan.x_max / step));
    std::int64_t per_axis = 2 * kmax + 1;
    std::uint64_t count = 1;
    for (int d = 0; d < n; ++d) count *= static_cast<std::uint64_t>(per_axis);
    if (cert.cubes + count > plan.max_cubes)
      throw resource_error("ahp_certificate: cube budget exceeded");
    std::vector<std::int64_t> k(static_cast<std::size_t>(n), -kmax);
    for (;;) {
      CubeSpec q;
      q.half = half;
      for (int d = 0; d < n; ++d)
        q.center.push_back(static_cast<double>(k[static_cast<std::size_t>(d)]) * step);
      ++cert.cubes;
      BoxSpec box = BoxSpec::from_cube(q);
      double vol = q.volume(n);
      double avg_w = mass(w, box) / vol;
      double lhs;
      if (p > 1.0) {
        bool touches_zero = true;
        for (int d = 0; d < n; ++d)
          touches_zero = touches_zero && box.lo[static_cast<std::size_t>(d)] <= 0.0 &&
                         box.hi[static_cast<std::size_t>(d)] >= 0.0;
        if (!dual_ok && touches_zero) {
          ++cert.counterexamples;
          lhs = std::numeric_limits<double>::quiet_NaN();
        } else {
          double avg_d = mass(wd, box) / vol;
          if (std::isinf(avg_d)) {
            ++cert.counterexamples;
            lhs = std::numeric_limits<double>::quiet_NaN();
          } else {
            lhs = std::pow(avg_w, 1.0 / p) * std::pow(avg_d, 1.0 / pp);
          }
        }
      } else {
        double inf = ess_inf(w, box);
        lhs = avg_w / inf;
      }
      if (std::isfinite(lhs)) {
        double ratio = lhs / psi_factor(q, eta);
        if (ratio > cert.max_ratio) {
          cert.max_ratio = ratio;
          cert.argmax = q;
        }
      } else if (std::isinf(lhs)) {
        cert.max_ratio = lhs;
        cert.argmax = q;
      }
      int d = n - 1;
      while (d >= 0) {
        if (++k[static_cast<std::size_t>(d)] <= kmax) break;
        k[static_cast<std::size_t>(d)] = -kmax;
        --d;
      }
      if (d < 0) break;
    }
  }
  return cert;
}

/// Piecewise-constant function on a tensor grid (n <= 2), zero outside.
class GridFunction {
 public:
  GridFunction(std::vector<double> cuts_x, std::vector<double> values)
      : cuts_{std::move(cuts_x)}, values_(std::move(values)), dim_(1) {
    require(cuts_[0].size() >= 2, "GridFunction: need at least one cell");
    require(values_.size() == cuts_[0].size() - 1, "GridFunction: cell count mismatch");
  }

  GridFunction(std::vector<double> cuts_x, std::vector<double> cuts_y,
               std::vector<double> values)
      : cuts_{std::move(cuts_x), std::move(cuts_y)}, values_(std::move(values)), dim_(2) {
    require(values_.size() == (cuts_[0].size() - 1) * (cuts_[1].size() - 1),
            "GridFunction: cell count mismatch");
  }

  int dim() const { return dim_; }
  const std::vector<double>& cuts(int axis) const { return cuts_[static_cast<std::size_t>(axis)]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double value_at(std::span<const double> x) const {
    std::size_t flat = 0, stride = 1;  // axis 0 fastest
    for (int d = 0; d < dim_; ++d) {
      const auto& c = cuts_[static_cast<std::size_t>(d)];
      double t = x[static_cast<std::size_t>(d)];
      if (t < c.front() || t >= c.back()) return 0.0;
      auto it = std::upper_bound(c.begin(), c.end(), t);
      std::size_t idx = static_cast<std::size_t>(it - c.begin()) - 1;
      flat += idx * stride;
      stride *= c.size() - 1;
    }
    return values_[flat];
  }

  /// Exact integral of |f|^s over box intersect support.
  double integral_abs_pow(const BoxSpec& box, double s) const {
    require(box.dim() == dim_, "GridFunction: box dimension mismatch");
    auto overlaps = [&](int axis, std::vector<std::pair<std::size_t, double>>& out) {
      const auto& c = cuts_[static_cast<std::size_t>(axis)];
      out.clear();
      double lo = box.lo[static_cast<std::size_t>(axis)];
      double hi = box.hi[static_cast<std::size_t>(axis)];
      for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        double a = std::max(lo, c[i]), b = std::min(hi, c[i + 1]);
        if (b > a) out.push_back({i, b - a});
      }
    };
    std::vector<std::pair<std::size_t, double>> ox;
    overlaps(0, ox);
    if (dim_ == 1) {
      double acc = 0.0;
      for (auto [i, len] : ox)
        if (values_[i] != 0.0) acc += std::pow(std::fabs(values_[i]), s) * len;
      return acc;
    }
    std::vector<std::pair<std::size_t, double>> oy;
    overlaps(1, oy);
    std::size_t nx = cuts_[0].size() - 1;
    double acc = 0.0;
    for (auto [ix, lx] : ox)
      for (auto [iy, ly] : oy) {
        double v = values_[ix + nx * iy];
        if (v != 0.0) acc += std::pow(std::fabs(v), s) * lx * ly;
      }
    return acc;
  }

 private:
  std::vector<std::vector<double>> cuts_;
  std::vector<double> values_;
  int dim_ = 1;
};

/// Declared candidate cube family: dyadic sidelengths 2^t for t in
/// [side_exp_min, side_exp_max], centers on a lattice of half the sidelength,
/// plus explicit extra cubes. Membership is closed.
struct CubeFamily {
  int side_exp_min = -6;
  int side_exp_max = 3;
  std::vector<CubeSpec> extra;

  template <class Fn>
  void for_each_containing(std::span<const double> x, Fn&& fn) const {
    int n = static_cast<int>(x.size());
    for (int t = side_exp_min; t <= side_exp_max; ++t) {
      double half = std::ldexp(1.0, t - 1);
      double step = half;
      std::vector<std::int64_t> klo(static_cast<std::size_t>(n)), khi(static_cast<std::size_t>(n));
      for (int d = 0; d < n; ++d) {
        klo[static_cast<std::size_t>(d)] =
            static_cast<std::int64_t>(std::ceil((x[static_cast<std::size_t>(d)] - half) / step - 1e-12));
        khi[static_cast<std::size_t>(d)] =
            static_cast<std::int64_t>(std::floor((x[static_cast<std::size_t>(d)] + half) / step + 1e-12));
      }
      std::vector<std::int64_t> k = klo;
      for (;;) {
        CubeSpec q;
        q.half = half;
        for (int d = 0; d < n; ++d)
          q.center.push_back(static_cast<double>(k[static_cast<std::size_t>(d)]) * step);
        fn(q);
        int d = n - 1;
        while (d >= 0) {
          if (++k[static_cast<std::size_t>(d)] <= khi[static_cast<std::size_t>(d)]) break;
          k[static_cast<std::size_t>(d)] = klo[static_cast<std::size_t>(d)];
          --d;
        }
        if (d < 0) break;
      }
    }
    for (const CubeSpec& q : extra) {
      bool inside = true;
      for (std::size_t d = 0; d < x.size(); ++d)
        inside = inside && std::fabs(x[d] - q.center[d]) <= q.half + 1e-15;
      if (inside) fn(q);
    }
  }
};

/// Discrete maximal operator: sup over the declared family of cubes through x
/// of (Psi_theta(Q)^{-1} avg_Q |f|^s)^{1/s}. A lower bound for the true sup.
inline double maximal(const GridFunction& f, double s, double theta,
                      std::span<const double> x, const CubeFamily& family = {}) {
  require(s > 0.0, "maximal: s must be positive");
  require(theta >= 0.0, "maximal: theta must be nonnegative");
  double best = 0.0;
  family.for_each_containing(x, [&](const CubeSpec& q) {
    BoxSpec box = BoxSpec::from_cube(q);
    double avg = f.integral_abs_pow(box, s) / q.volume(f.dim());
    double v = std::pow(avg / psi_factor(q, theta), 1.0 / s);
    best = std::max(best, v);
  });
  return best;
}

/// Vector-valued maximal inequality probe:
///   || (sum_j (M_s^theta f_j)^q)^{1/q} ||_{L^p_w} over
///   || (sum_j |f_j|^q)^{1/q} ||_{L^p_w},
/// both evaluated on the arrangement cells of the inputs.
struct FeffermanSteinReport {
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;
};

inline FeffermanSteinReport fefferman_stein_probe(const std::vector<GridFunction>& fs,
                                                  double p, double q, double s,
                                                  double theta, const Weight& w,
                                                  const CubeFamily& family = {}) {
  require(!fs.empty(), "fefferman_stein_probe: need at least one function");
  require(p > 0.0 && q > 0.0, "fefferman_stein_probe: p, q must be positive");
  require(s > 0.0 && s < std::min(p / w.declared_rw(), q) + 1e-15,
          "fefferman_stein_probe: need 0 < s < min(p / r_w, q)");
  int n = fs.front().dim();
  require(n == 1, "fefferman_stein_probe: one-dimensional grids supported");
  // merged arrangement cuts
  std::vector<double> cuts;
  for (const auto& f : fs)
    cuts.insert(cuts.end(), f.cuts(0).begin(), f.cuts(0).end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::fabs(a - b) < 1e-14; }),
             cuts.end());
  double num_p = 0.0, den_p = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    double cell_mass = mass(w, BoxSpec{{cuts[i]}, {cuts[i + 1]}});
    double sm = 0.0, sf = 0.0;
    double pt[1] = {mid};
    std::span<const double> px(pt, 1);
    for (const auto& f : fs) {
      double mv = maximal(f, s, theta, px, family);
      double fv = std::fabs(f.value_at(px));
      sm += std::pow(mv, q);
      sf += std::pow(fv, q);
    }
    num_p += std::pow(sm, p / q) * cell_mass;
    den_p += std::pow(sf, p / q) * cell_mass;
  }
  FeffermanSteinReport rep;
  rep.numerator = std::pow(num_p, 1.0 / p);
  rep.denominator = std::pow(den_p, 1.0 / p);
  rep.ratio = rep.denominator > 0.0 ? rep.numerator / rep.denominator
                                    : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

/// Fits (C, kappa) in the critical-radius slow-growth inequality
///   rho(y) <= C rho(x) (1 + |x-y| / rho(x))^{kappa/(kappa+1)}
/// over random pairs; kappa is existential, the fit is diagnostic only.
struct SlowGrowthFit {
  double constant = 0.0;
  double kappa = 0.0;
};

inline SlowGrowthFit rho_slow_growth_fit(int n, int pairs, std::uint64_t seed,
                                         double range = 20.0) {
  Rng rng(seed);
  std::vector<std::vector<double>> xs, ys;
  for (int i = 0; i < pairs; ++i) {
    std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
      x[static_cast<std::size_t>(d)] = (2.0 * rng.uniform() - 1.0) * range;
      y[static_cast<std::size_t>(d)] = (2.0 * rng.uniform() - 1.0) * range;
    }
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }
  SlowGrowthFit best{std::numeric_limits<double>::infinity(), 0.0};
  for (double kappa = 1.0; kappa <= 8.0; kappa += 0.5) {
    double expo = kappa / (kappa + 1.0);
    double c = 0.0;
    for (int i = 0; i < pairs; ++i) {
      double rx = critical_radius(xs[static_cast<std::size_t>(i)]);
      double ry = critical_radius(ys[static_cast<std::size_t>(i)]);
      double dist = 0.0;
      for (int d = 0; d < n; ++d)
        dist = std::max(dist, std::fabs(xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] -
                                        ys[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]));
      double base = 1.0 + dist / rx;
      c = std::max(c, ry / (rx * std::pow(base, expo)));
    }
    if (c < best.constant) best = {c, kappa};
  }
  return best;
}

}  // namespace hermlet
