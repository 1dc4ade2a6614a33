#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hermlet/errors.hpp"

namespace hermlet {

/// C(a, b) with saturation at uint64 max.
inline std::uint64_t binomial(std::uint64_t a, std::uint64_t b) {
  if (b > a) return 0;
  if (b > a - b) b = a - b;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= b; ++i) {
    std::uint64_t num = a - b + i;
    if (r > std::numeric_limits<std::uint64_t>::max() / num)
      return std::numeric_limits<std::uint64_t>::max();
    r = r * num / i;
  }
  return r;
}

/// Number of multi-indices in dimension n with total degree exactly k.
inline std::uint64_t degree_count(int n, int k) {
  return binomial(static_cast<std::uint64_t>(k) + n - 1, n - 1);
}

/// Number of multi-indices with total degree at most N.
inline std::uint64_t simplex_size(int n, int N) {
  return binomial(static_cast<std::uint64_t>(N) + n, n);
}

/// Calls fn(xi) for every multi-index of dimension n with |xi| = k,
/// in lexicographic order on (xi_1, ..., xi_n).
template <class Fn>
void for_each_composition(int k, int n, Fn&& fn) {
  std::vector<int> xi(static_cast<std::size_t>(n), 0);
  xi.back() = k;
  if (n == 1) {
    fn(std::span<const int>(xi));
    return;
  }
  for (;;) {
    fn(std::span<const int>(xi));
    int i = n - 2;
    while (i >= 0) {
      int rest = 0;
      for (int d = i + 1; d < n; ++d) rest += xi[static_cast<std::size_t>(d)];
      if (rest > 0) {
        xi[static_cast<std::size_t>(i)] += 1;
        for (int d = i + 1; d < n; ++d) xi[static_cast<std::size_t>(d)] = 0;
        xi.back() = rest - 1;
        break;
      }
      --i;
    }
    if (i < 0) return;
  }
}

/// Rank of xi among same-degree multi-indices in the enumeration order above.
inline std::uint64_t composition_rank(std::span<const int> xi) {
  int n = static_cast<int>(xi.size());
  int k = 0;
  for (int v : xi) k += v;
  std::uint64_t rank = 0;
  int remaining = k;
  for (int d = 0; d < n - 1; ++d) {
    for (int v = 0; v < xi[static_cast<std::size_t>(d)]; ++v)
      rank += degree_count(n - d - 1, remaining - v);
    remaining -= xi[static_cast<std::size_t>(d)];
  }
  return rank;
}

}  // namespace hermlet
