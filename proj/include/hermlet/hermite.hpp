#pragma once

// Numerically stable evaluation of the orthonormal Hermite functions
//   h_k(t) = (2^k k! sqrt(pi))^{-1/2} H_k(t) e^{-t^2/2},
// their zeros, spectral projector kernels, Christoffel functions and the
// derived Gauss-type cubature rule. Everything runs on the normalized
// three-term recurrence
//   h_{k+1}(t) = t sqrt(2/(k+1)) h_k(t) - sqrt(k/(k+1)) h_{k-1}(t),
// which keeps magnitudes O(1) in the oscillatory region. For |t| far into
// the Gaussian tail the recurrence is carried with an explicit power-of-two
// exponent so signs and ratios survive double underflow.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hermlet/errors.hpp"
#include "hermlet/multiindex.hpp"
#include "hermlet/parallel.hpp"

namespace hermlet {

inline constexpr double kPiQuarterInv = 0.75112554446494248;  // pi^{-1/4}

/// Eigenvalue of the harmonic oscillator on degree-k Hermite functions.
inline double eigenvalue(std::int64_t k, int n) {
  require(k >= 0, "eigenvalue: degree must be nonnegative");
  require(n >= 1, "eigenvalue: dimension must be positive");
  return 2.0 * static_cast<double>(k) + static_cast<double>(n);
}

/// Recurrence coefficients a[k] = sqrt(2/(k+1)), b[k] = sqrt(k/(k+1)).
struct RecurrenceCoeffs {
  std::vector<double> a, b;
};

inline RecurrenceCoeffs recurrence_coeffs(int k_max) {
  RecurrenceCoeffs c;
  c.a.resize(static_cast<std::size_t>(k_max) + 1);
  c.b.resize(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    c.a[static_cast<std::size_t>(k)] = std::sqrt(2.0 / (k + 1));
    c.b[static_cast<std::size_t>(k)] = std::sqrt(static_cast<double>(k) / (k + 1));
  }
  return c;
}

namespace detail {

// Scaled start value: h_0(t) = m * 2^e with m in a safe range even when
// e^{-t^2/2} underflows.
inline void scaled_h0(double t, double& m, long& e) {
  double q = 0.5 * t * t;
  if (q < 690.0) {
    m = kPiQuarterInv * std::exp(-q);
    e = 0;
    return;
  }
  double log2v = -q / std::numbers::ln2 - 0.25 * std::log2(std::numbers::pi);
  double fl = std::floor(log2v);
  e = static_cast<long>(fl);
  m = std::exp2(log2v - fl);
}

inline constexpr double kRescaleHi = 0x1p+500;
inline constexpr double kRescaleLo = 0x1p-500;

}  // namespace detail

/// (h_{m-1}(t), h_m(t)) scaled by a common power of two:
/// h_m(t) = upper * 2^exp2, h_{m-1}(t) = lower * 2^exp2.
struct HermitePair {
  double lower = 0.0;
  double upper = 0.0;
  long exp2 = 0;
};

inline HermitePair hermite_pair_scaled(int m, double t, const RecurrenceCoeffs& c) {
  double prev = 0.0, cur;
  long e;
  detail::scaled_h0(t, cur, e);
  for (int k = 0; k < m; ++k) {
    double next = t * c.a[static_cast<std::size_t>(k)] * cur -
                  c.b[static_cast<std::size_t>(k)] * prev;
    prev = cur;
    cur = next;
    double mag = std::fabs(cur) > std::fabs(prev) ? std::fabs(cur) : std::fabs(prev);
    if (mag > detail::kRescaleHi) {
      prev *= detail::kRescaleLo;
      cur *= detail::kRescaleLo;
      e += 500;
    } else if (mag > 0.0 && mag < detail::kRescaleLo) {
      prev *= detail::kRescaleHi;
      cur *= detail::kRescaleHi;
      e -= 500;
    }
  }
  return {prev, cur, e};
}

inline HermitePair hermite_pair_scaled(int m, double t) {
  return hermite_pair_scaled(m, t, recurrence_coeffs(m));
}

/// h_k(t) as a plain double; underflows to zero for |t| large.
inline double hermite_single(int k, double t, const RecurrenceCoeffs& c) {
  HermitePair p = hermite_pair_scaled(k, t, c);
  return std::ldexp(p.upper, static_cast<int>(p.exp2));
}

inline double hermite_single(int k, double t) {
  return hermite_single(k, t, recurrence_coeffs(k));
}

/// h_0(t)..h_{k_max}(t) into out (size k_max+1). Plain doubles.
inline void hermite_values_into(int k_max, double t, const RecurrenceCoeffs& c,
                                std::span<double> out) {
  double prev = 0.0;
  double cur = kPiQuarterInv * std::exp(-0.5 * t * t);
  out[0] = cur;
  for (int k = 0; k < k_max; ++k) {
    double next = t * c.a[static_cast<std::size_t>(k)] * cur -
                  c.b[static_cast<std::size_t>(k)] * prev;
    prev = cur;
    cur = next;
    out[static_cast<std::size_t>(k) + 1] = cur;
  }
}

inline std::vector<double> hermite_values(int k_max, double t) {
  require(k_max >= 0, "hermite_values: degree must be nonnegative");
  require(std::isfinite(t), "hermite_values: argument must be finite");
  std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
  hermite_values_into(k_max, t, recurrence_coeffs(k_max), out);
  return out;
}

/// Number of zeros of h_m in (t, +inf), by the Sturm sign-change count of
/// the orthonormal sequence h_0(t)..h_m(t).
inline int hermite_zero_count_above(int m, double t, const RecurrenceCoeffs& c) {
  double prev = 0.0, cur;
  long e;
  detail::scaled_h0(t, cur, e);
  int count = 0;
  int last = 1;  // sign of h_0 > 0
  for (int k = 0; k < m; ++k) {
    double next = t * c.a[static_cast<std::size_t>(k)] * cur -
                  c.b[static_cast<std::size_t>(k)] * prev;
    prev = cur;
    cur = next;
    int s = cur > 0.0 ? 1 : (cur < 0.0 ? -1 : -last);
    if (s != last) {
      ++count;
      last = s;
    }
    double mag = std::fabs(cur) > std::fabs(prev) ? std::fabs(cur) : std::fabs(prev);
    if (mag > detail::kRescaleHi) {
      prev *= detail::kRescaleLo;
      cur *= detail::kRescaleLo;
    } else if (mag > 0.0 && mag < detail::kRescaleLo) {
      prev *= detail::kRescaleHi;
      cur *= detail::kRescaleHi;
    }
  }
  return count;
}

/// Sorted zeros of H_m (equivalently of h_m). For even m the set is
/// {zeta_{-m/2}, ..., zeta_{-1}, zeta_1, ..., zeta_{m/2}} with
/// zeta_{-v} = -zeta_v exactly.
struct ZeroSet {
  int order = 0;                // m
  std::vector<double> zeros;    // size m, strictly increasing

  /// zeta_v for v in {+-1, ..., +-(m/2)} (even m).
  double zeta(int v) const {
    int half = order / 2;
    require(v != 0 && v >= -half && v <= half, "ZeroSet::zeta: index out of range");
    return v > 0 ? zeros[static_cast<std::size_t>(half + v - 1)]
                 : zeros[static_cast<std::size_t>(half + v)];
  }
};

struct ZeroOptions {
  int max_iter = 120;
  double rel_tol = 4.0 * std::numeric_limits<double>::epsilon();
};

namespace detail {

// Safeguarded Newton on h_m inside a bracket known to contain exactly one
// simple zero with a sign change across it.
inline double refine_zero(int m, double lo, double hi, int sign_lo,
                          const RecurrenceCoeffs& c, const ZeroOptions& opt) {
  double sm = std::sqrt(2.0 * m);
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    HermitePair p = hermite_pair_scaled(m, x, c);
    double f = p.upper;
    if (f == 0.0) return x;
    if ((f > 0.0 ? 1 : -1) == sign_lo)
      lo = x;
    else
      hi = x;
    double fp = sm * p.lower - x * p.upper;
    double xn = (fp != 0.0) ? x - f / fp : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) <= opt.rel_tol * (1.0 + std::fabs(x))) return xn;
    x = xn;
  }
  std::ostringstream os;
  os << "hermite zero refinement hit the iteration cap in bracket [" << lo << ", "
     << hi << "] for order " << m;
  throw convergence_error(os.str());
}

// All zeros of h_m for any m >= 1 (internal; odd m includes an exact 0).
inline std::vector<double> zeros_any(int m, const ZeroOptions& opt) {
  RecurrenceCoeffs c = recurrence_coeffs(m);
  double ub = std::sqrt(2.0 * m + 1.0);
  int npos = m / 2;
  std::vector<double> pos(static_cast<std::size_t>(npos));
  if (npos > 0) {
    struct Seg {
      double lo, hi;
      int clo, chi;  // zero counts above lo / above hi
    };
    std::vector<Seg> stack;
    stack.push_back({0.0, ub, npos, 0});
    std::vector<std::pair<double, double>> brackets(static_cast<std::size_t>(npos));
    while (!stack.empty()) {
      Seg s = stack.back();
      stack.pop_back();
      int inside = s.clo - s.chi;
      if (inside == 0) continue;
      if (inside == 1) {
        brackets[static_cast<std::size_t>(npos - s.clo)] = {s.lo, s.hi};
        continue;
      }
      double mid = 0.5 * (s.lo + s.hi);
      int cmid = hermite_zero_count_above(m, mid, c);
      stack.push_back({s.lo, mid, s.clo, cmid});
      stack.push_back({mid, s.hi, cmid, s.chi});
    }
    par::parallel_for(static_cast<std::size_t>(npos), [&](std::size_t i) {
      auto [lo, hi] = brackets[i];
      HermitePair pl = hermite_pair_scaled(m, lo, c);
      int sign_lo = pl.upper >= 0.0 ? 1 : -1;
      pos[i] = refine_zero(m, lo, hi, sign_lo, c, opt);
    });
  }
  std::vector<double> all;
  all.reserve(static_cast<std::size_t>(m));
  for (int i = npos - 1; i >= 0; --i) all.push_back(-pos[static_cast<std::size_t>(i)]);
  if (m % 2 == 1) all.push_back(0.0);
  for (int i = 0; i < npos; ++i) all.push_back(pos[static_cast<std::size_t>(i)]);
  return all;
}

}  // namespace detail

/// Zeros of H_m for even m, isolated by Sturm counts and polished by
/// safeguarded Newton; the negative half mirrors the positive half exactly.
inline ZeroSet hermite_zeros(int m, const ZeroOptions& opt = {}) {
  require(m >= 2 && m % 2 == 0, "hermite_zeros: order must be even and >= 2");
  return ZeroSet{m, detail::zeros_any(m, opt)};
}

struct InterlacingReport {
  bool ok = true;
  int first_failure_order = 0;  // smallest m where interlacing failed, 0 if none
  int checked_up_to = 0;
};

/// Certifies that the zeros of H_m strictly interlace those of H_{m+1} for
/// every m < m_max, walking the recurrence chain with interlacing brackets.
inline InterlacingReport verify_interlacing(int m_max, const ZeroOptions& opt = {}) {
  require(m_max >= 2, "verify_interlacing: order must be >= 2");
  InterlacingReport rep;
  rep.checked_up_to = m_max;
  std::vector<double> prev_pos;  // positive zeros of h_{m-1}
  // h_1 has the single zero 0.
  for (int m = 2; m <= m_max; ++m) {
    RecurrenceCoeffs c = recurrence_coeffs(m);
    double ub = std::sqrt(2.0 * m + 1.0);
    int npos = m / 2;
    // Bracket ends: 0 (even m only), positive zeros of h_{m-1}, ub.
    std::vector<double> ends;
    ends.reserve(prev_pos.size() + 2);
    if (m % 2 == 0) ends.push_back(0.0);
    for (double z : prev_pos) ends.push_back(z);
    ends.push_back(ub);
    if (static_cast<int>(ends.size()) - 1 != npos) {
      rep.ok = false;
      rep.first_failure_order = m;
      return rep;
    }
    std::vector<double> cur(static_cast<std::size_t>(npos));
    std::vector<char> bad(static_cast<std::size_t>(npos), 0);
    par::parallel_for(static_cast<std::size_t>(npos), [&](std::size_t i) {
      double lo = ends[i], hi = ends[i + 1];
      HermitePair pl = hermite_pair_scaled(m, lo, c);
      HermitePair ph = hermite_pair_scaled(m, hi, c);
      if (pl.upper == 0.0 || ph.upper == 0.0 || (pl.upper > 0.0) == (ph.upper > 0.0)) {
        bad[i] = 1;  // no strict sign change: interlacing violated
        return;
      }
      double z = detail::refine_zero(m, lo, hi, pl.upper > 0.0 ? 1 : -1, c, opt);
      if (!(z > lo && z < hi)) {
        bad[i] = 1;
        return;
      }
      cur[i] = z;
    });
    for (std::size_t i = 0; i < bad.size(); ++i) {
      if (bad[i]) {
        rep.ok = false;
        rep.first_failure_order = m;
        return rep;
      }
    }
    prev_pos = std::move(cur);
  }
  return rep;
}

struct KernelOptions {
  std::uint64_t max_terms = 1'000'000;  // multi-index enumeration cap
};

namespace detail {

inline void check_point_dims(std::span<const double> x, std::span<const double> y) {
  require(!x.empty() && x.size() == y.size(),
          "kernel: points must share a positive dimension");
}

inline void check_term_cap(std::uint64_t count, const KernelOptions& opt) {
  if (count > opt.max_terms) {
    std::ostringstream os;
    os << "kernel: multi-index count " << count << " exceeds cap " << opt.max_terms;
    throw resource_error(os.str());
  }
}

}  // namespace detail

/// h_xi(x) = prod_d h_{xi_d}(x_d).
inline double hermite_nd(std::span<const int> xi, std::span<const double> x) {
  require(!xi.empty() && xi.size() == x.size(),
          "hermite_nd: index and point dimensions must agree");
  double mant = 1.0;
  long e = 0;
  for (std::size_t d = 0; d < xi.size(); ++d) {
    require(xi[d] >= 0, "hermite_nd: multi-index entries must be nonnegative");
    HermitePair p = hermite_pair_scaled(xi[d], x[d]);
    mant *= p.upper;
    e += p.exp2;
    if (mant != 0.0 && std::fabs(mant) < detail::kRescaleLo) {
      mant *= detail::kRescaleHi;
      e -= 500;
    }
  }
  return std::ldexp(mant, static_cast<int>(e));
}

/// Kernel of the projection onto W_k: sum over |xi| = k of h_xi(x) h_xi(y).
inline double projector_kernel(int k, std::span<const double> x,
                               std::span<const double> y,
                               const KernelOptions& opt = {}) {
  require(k >= 0, "projector_kernel: degree must be nonnegative");
  detail::check_point_dims(x, y);
  int n = static_cast<int>(x.size());
  detail::check_term_cap(degree_count(n, k), opt);
  RecurrenceCoeffs c = recurrence_coeffs(k);
  std::vector<std::vector<double>> hx(x.size()), hy(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    hx[d].resize(static_cast<std::size_t>(k) + 1);
    hy[d].resize(static_cast<std::size_t>(k) + 1);
    hermite_values_into(k, x[d], c, hx[d]);
    hermite_values_into(k, y[d], c, hy[d]);
  }
  double sum = 0.0;
  for_each_composition(k, n, [&](std::span<const int> xi) {
    double term = 1.0;
    for (std::size_t d = 0; d < xi.size(); ++d) {
      std::size_t deg = static_cast<std::size_t>(xi[d]);
      term *= hx[d][deg] * hy[d][deg];
    }
    sum += term;
  });
  return sum;
}

/// Q_N(x,y) = sum_{k<=N} P_k(x,y) by direct summation.
inline double partial_kernel_direct(int N, std::span<const double> x,
                                    std::span<const double> y,
                                    const KernelOptions& opt = {}) {
  require(N >= 0, "partial_kernel: degree must be nonnegative");
  detail::check_point_dims(x, y);
  int n = static_cast<int>(x.size());
  detail::check_term_cap(simplex_size(n, N), opt);
  RecurrenceCoeffs c = recurrence_coeffs(N);
  std::vector<std::vector<double>> hx(x.size()), hy(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    hx[d].resize(static_cast<std::size_t>(N) + 1);
    hy[d].resize(static_cast<std::size_t>(N) + 1);
    hermite_values_into(N, x[d], c, hx[d]);
    hermite_values_into(N, y[d], c, hy[d]);
  }
  double sum = 0.0;
  for (int k = 0; k <= N; ++k) {
    for_each_composition(k, n, [&](std::span<const int> xi) {
      double term = 1.0;
      for (std::size_t d = 0; d < xi.size(); ++d) {
        std::size_t deg = static_cast<std::size_t>(xi[d]);
        term *= hx[d][deg] * hy[d][deg];
      }
      sum += term;
    });
  }
  return sum;
}

/// Q_N(x,y). In one dimension the Christoffel-Darboux form is used away from
/// the diagonal; it matches the direct sum to roundoff.
inline double partial_kernel(int N, std::span<const double> x,
                             std::span<const double> y,
                             const KernelOptions& opt = {}) {
  detail::check_point_dims(x, y);
  if (x.size() == 1) {
    require(N >= 0, "partial_kernel: degree must be nonnegative");
    double s = x[0], t = y[0];
    if (std::fabs(s - t) < 1e-6 * (1.0 + std::fabs(s) + std::fabs(t)))
      return partial_kernel_direct(N, x, y, opt);
    RecurrenceCoeffs c = recurrence_coeffs(N + 1);
    std::vector<double> hs(static_cast<std::size_t>(N) + 2),
        ht(static_cast<std::size_t>(N) + 2);
    hermite_values_into(N + 1, s, c, hs);
    hermite_values_into(N + 1, t, c, ht);
    std::size_t n1 = static_cast<std::size_t>(N) + 1;
    double alpha = std::sqrt(0.5 * (N + 1));
    return alpha * (hs[n1] * ht[n1 - 1] - hs[n1 - 1] * ht[n1]) / (s - t);
  }
  return partial_kernel_direct(N, x, y, opt);
}

/// Christoffel function tau(N, t) = 1 / Q_N(t, t) in one dimension, carried
/// with an explicit exponent so far-out nodes do not overflow.
inline double christoffel(int N, double t) {
  require(N >= 0, "christoffel: degree must be nonnegative");
  RecurrenceCoeffs c = recurrence_coeffs(N);
  double prev = 0.0, cur;
  long e;
  detail::scaled_h0(t, cur, e);
  double S = cur * cur;  // Q = S * 2^{es}
  long es = 2 * e;
  for (int k = 0; k < N; ++k) {
    double next = t * c.a[static_cast<std::size_t>(k)] * cur -
                  c.b[static_cast<std::size_t>(k)] * prev;
    prev = cur;
    cur = next;
    double mag = std::fabs(cur) > std::fabs(prev) ? std::fabs(cur) : std::fabs(prev);
    if (mag > detail::kRescaleHi) {
      prev *= detail::kRescaleLo;
      cur *= detail::kRescaleLo;
      e += 500;
    } else if (mag > 0.0 && mag < detail::kRescaleLo) {
      prev *= detail::kRescaleHi;
      cur *= detail::kRescaleHi;
      e -= 500;
    }
    S += std::ldexp(cur * cur, static_cast<int>(2 * e - es));
    if (S > 0x1p+100) {
      S = std::ldexp(S, -100);
      es += 100;
    }
  }
  return std::ldexp(1.0 / S, static_cast<int>(-es));
}

/// Gauss-type cubature on the Hermite zero set: nodes are the m zeros of
/// H_m, weights tau(m, node). Exact for  int f g  whenever f in V_k,
/// g in V_l with k + l <= 2m - 1.
struct CubatureRule {
  int order = 0;  // m
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline CubatureRule hermite_cubature(int m, const ZeroOptions& opt = {}) {
  ZeroSet zs = hermite_zeros(m, opt);
  CubatureRule rule;
  rule.order = m;
  rule.nodes = zs.zeros;
  rule.weights.resize(rule.nodes.size());
  par::parallel_for(rule.nodes.size(), [&](std::size_t i) {
    rule.weights[i] = christoffel(m, rule.nodes[i]);
  });
  return rule;
}

}  // namespace hermlet
