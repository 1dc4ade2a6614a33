#pragma once

// Weighted L^p norms of finite Hermite expansions by tensor Gauss-Legendre
// panels over a box large enough to contain the oscillatory region; the
// Gaussian tail beyond it is certified by an elementary envelope bound (see
// tail_bound_log below) and is negligible at the default margins.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "hermlet/errors.hpp"
#include "hermlet/expansion.hpp"
#include "hermlet/weights.hpp"

namespace hermlet {

/// Shared quadrature mesh on [-X, X]^n (tensor product of GL15 panels).
struct PanelMesh {
  double x_max = 0.0;
  std::vector<double> points1d;
  std::vector<double> weights1d;

  static PanelMesh build(double x_max, double panel_width) {
    require(x_max > 0.0 && panel_width > 0.0, "PanelMesh: bad parameters");
    PanelMesh m;
    m.x_max = x_max;
    int panels = static_cast<int>(std::ceil(2.0 * x_max / panel_width));
    double h = 2.0 * x_max / panels;
    m.points1d.reserve(static_cast<std::size_t>(panels) * 15);
    m.weights1d.reserve(static_cast<std::size_t>(panels) * 15);
    for (int p = 0; p < panels; ++p) {
      double a = -x_max + p * h;
      double mid = a + 0.5 * h, half = 0.5 * h;
      for (int i = 0; i < 15; ++i) {
        m.points1d.push_back(mid + half * quad::kGlNodes[i]);
        m.weights1d.push_back(half * quad::kGlWeights[i]);
      }
    }
    return m;
  }
};

/// log of a certified bound for sum_{k <= N} h_k(t)^2 at |t| = x >= sqrt(2N+2),
/// from |H_k(t)| <= (2|t|)^k e^{k^2/(4t^2)}:
///   Q_N(t,t) <= (N+1) (2x^2)^N / N! * e^{N^2/(2x^2)} e^{-x^2} / sqrt(pi).
inline double diagonal_tail_log(int N, double x) {
  double x2 = x * x;
  double lg = std::log(static_cast<double>(N) + 1.0) + N * std::log(2.0 * x2) -
              std::lgamma(static_cast<double>(N) + 1.0) +
              0.5 * static_cast<double>(N) * N / x2 - x2 -
              0.5 * std::log(std::numbers::pi);
  return lg;
}

/// Certified upper bound for the tail integral
///   int_{|x| > X} |g(x)|^p w(x) dx,  g in V_N (1-D),
/// using |g| <= ||c||_2 sqrt(Q_N) and log-concavity of the envelope.
inline double lpw_tail_bound(int N, double coeff_l2, double p, const Weight& w, double X) {
  if (coeff_l2 == 0.0) return 0.0;
  require(X * X > 2.0 * N + 2.0, "lpw_tail_bound: domain must clear the turning points");
  // envelope e(x) = exp(L(x)) with L(x) = p/2 * [log Q-bound] + log w-growth
  auto log_env = [&](double x) {
    double lg = 0.5 * p * diagonal_tail_log(N, x) + p * std::log(coeff_l2);
    switch (w.family()) {
      case WeightFamily::constant:
        lg += std::log(std::max(w.constant_value(), 1e-300));
        break;
      case WeightFamily::power:
        lg += w.epsilon() * std::log(x);
        break;
      case WeightFamily::gaussian:
        lg += w.sign() * w.epsilon() * x * x;
        break;
      case WeightFamily::table: {
        // zero outside the table; otherwise bound by the largest table value
        if (x >= std::fabs(w.table_grid().front()) && x >= std::fabs(w.table_grid().back()))
          return -std::numeric_limits<double>::infinity();
        double top = 0.0;
        for (double v : w.table_values()) top = std::max(top, v);
        lg += std::log(std::max(top, 1e-300));
        break;
      }
    }
    return lg;
  };
  double l0 = log_env(X);
  if (l0 == -std::numeric_limits<double>::infinity()) return 0.0;
  // derivative of log envelope at X (numeric): must be negative
  double h = 1e-4 * X;
  double slope = (log_env(X + h) - log_env(X - h)) / (2.0 * h);
  if (!(slope < -1e-6))
    throw validation_error("lpw_tail_bound: envelope not decaying; norm may diverge");
  // int_X^inf e^{L} <= e^{L(X)} / |L'(X)| for log-concave decay; factor 2 for both tails
  return 2.0 * std::exp(l0) / (-slope);
}

struct LpwOptions {
  double panel_width = 0.0;  // 0: auto from degree
  double panel_scale = 1.0;  // multiplies the auto width
  double x_max = 0.0;        // 0: auto from degree
  double tail_rel_cap = 1e-10;
};

/// || g ||_{L^p_w} for a finite Hermite expansion (n = 1 or 2). p = inf takes
/// the sup over the mesh.
inline double lpw_norm(const HermiteExpansion& g, double p, const Weight& w,
                       const LpwOptions& opt = {}) {
  require(p > 0.0, "lpw_norm: p must be positive");
  int n = g.dim();
  require(n >= 1 && n <= 2, "lpw_norm: dimensions 1 and 2 supported");
  int N = std::max(0, g.active_degree());
  double turning = std::sqrt(2.0 * N + static_cast<double>(n));
  double X = opt.x_max > 0.0 ? opt.x_max : turning + 4.0;
  double width = opt.panel_width > 0.0
                     ? opt.panel_width
                     : opt.panel_scale *
                           std::min(0.5, 2.0 * std::numbers::pi / (4.0 * std::max(4.0, turning)));
  PanelMesh mesh = PanelMesh::build(X, width);
  std::size_t npts = mesh.points1d.size();
  bool sup_norm = std::isinf(p);
  if (sup_norm)
    require(w.locally_bounded(), "lpw_norm: p = inf unsupported for unbounded weights");

  // per-point |g| values
  RecurrenceCoeffs rc = recurrence_coeffs(g.max_degree());
  std::vector<double> htab(static_cast<std::size_t>(g.max_degree()) + 1);
  double acc = 0.0, sup = 0.0;
  if (n == 1) {
    for (std::size_t i = 0; i < npts; ++i) {
      double x = mesh.points1d[i];
      hermite_values_into(g.max_degree(), x, rc, htab);
      std::complex<double> v(0.0, 0.0);
      for (std::size_t k = 0; k < g.size(); ++k) v += g.at_flat(k) * htab[k];
      double av = std::abs(v);
      double pt[1] = {x};
      double wv = w(std::span<const double>(pt, 1));
      if (sup_norm)
        sup = std::max(sup, av);
      else
        acc += std::pow(av, p) * wv * mesh.weights1d[i];
    }
  } else {
    std::vector<double> hy(static_cast<std::size_t>(g.max_degree()) + 1);
    for (std::size_t iy = 0; iy < npts; ++iy) {
      double y = mesh.points1d[iy];
      hermite_values_into(g.max_degree(), y, rc, hy);
      for (std::size_t ix = 0; ix < npts; ++ix) {
        double x = mesh.points1d[ix];
        hermite_values_into(g.max_degree(), x, rc, htab);
        std::complex<double> v(0.0, 0.0);
        for (int k = 0; k <= g.max_degree(); ++k) {
          std::size_t idx = g.degree_offset(k);
          for_each_composition(k, 2, [&](std::span<const int> xi) {
            v += g.at_flat(idx++) * htab[static_cast<std::size_t>(xi[0])] *
                 hy[static_cast<std::size_t>(xi[1])];
          });
        }
        double av = std::abs(v);
        double pt[2] = {x, y};
        double wv = w(std::span<const double>(pt, 2));
        if (sup_norm)
          sup = std::max(sup, av);
        else
          acc += std::pow(av, p) * wv * mesh.weights1d[ix] * mesh.weights1d[iy];
      }
    }
  }
  if (sup_norm) return sup;
  double tail = 0.0;
  if (n == 1) {
    double l2 = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) l2 += std::norm(g.at_flat(k));
    tail = lpw_tail_bound(N, std::sqrt(l2), p, w, X);
  }
  return std::pow(acc + tail, 1.0 / p);
}

}  // namespace hermlet
