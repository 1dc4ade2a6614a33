#pragma once

// Test-only high-precision oracle: the orthonormal Hermite recurrence run in
// MPFR at 256 bits (about 77 decimal digits), independent of the library's
// double-precision path.

#include <mpfr.h>

#include <vector>

namespace oracle {

inline std::vector<double> hermite_values_hp(int k_max, double t, mpfr_prec_t prec = 256) {
  std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
  mpfr_t tt, prev, cur, next, a, b, tmp;
  mpfr_inits2(prec, tt, prev, cur, next, a, b, tmp, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(tt, t, MPFR_RNDN);
  // h_0 = pi^{-1/4} e^{-t^2/2}
  mpfr_const_pi(cur, MPFR_RNDN);
  mpfr_rootn_ui(cur, cur, 4, MPFR_RNDN);
  mpfr_ui_div(cur, 1, cur, MPFR_RNDN);
  mpfr_sqr(tmp, tt, MPFR_RNDN);
  mpfr_div_ui(tmp, tmp, 2, MPFR_RNDN);
  mpfr_neg(tmp, tmp, MPFR_RNDN);
  mpfr_exp(tmp, tmp, MPFR_RNDN);
  mpfr_mul(cur, cur, tmp, MPFR_RNDN);
  mpfr_set_ui(prev, 0, MPFR_RNDN);
  out[0] = mpfr_get_d(cur, MPFR_RNDN);
  for (int k = 0; k < k_max; ++k) {
    mpfr_set_ui(a, 2, MPFR_RNDN);
    mpfr_div_ui(a, a, static_cast<unsigned long>(k) + 1, MPFR_RNDN);
    mpfr_sqrt(a, a, MPFR_RNDN);
    mpfr_set_ui(b, static_cast<unsigned long>(k), MPFR_RNDN);
    mpfr_div_ui(b, b, static_cast<unsigned long>(k) + 1, MPFR_RNDN);
    mpfr_sqrt(b, b, MPFR_RNDN);
    mpfr_mul(next, tt, a, MPFR_RNDN);
    mpfr_mul(next, next, cur, MPFR_RNDN);
    mpfr_mul(tmp, b, prev, MPFR_RNDN);
    mpfr_sub(next, next, tmp, MPFR_RNDN);
    mpfr_set(prev, cur, MPFR_RNDN);
    mpfr_set(cur, next, MPFR_RNDN);
    out[static_cast<std::size_t>(k) + 1] = mpfr_get_d(cur, MPFR_RNDN);
  }
  mpfr_clears(tt, prev, cur, next, a, b, tmp, static_cast<mpfr_ptr>(nullptr));
  return out;
}

}  // namespace oracle
