#pragma once

// Finite Hermite expansions: an element of V_N in dimension n, stored
// densely over the total-degree simplex {|xi| <= N}.

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "hermlet/errors.hpp"
#include "hermlet/hermite.hpp"
#include "hermlet/multiindex.hpp"
#include "hermlet/report.hpp"
#include "hermlet/rng.hpp"

namespace hermlet {

class HermiteExpansion {
 public:
  using Scalar = std::complex<double>;

  HermiteExpansion() = default;

  HermiteExpansion(int dim, int max_degree) : dim_(dim), max_degree_(max_degree) {
    require(dim >= 1, "HermiteExpansion: dimension must be positive");
    require(max_degree >= 0, "HermiteExpansion: max degree must be nonnegative");
    std::uint64_t sz = simplex_size(dim, max_degree);
    require(sz <= 50'000'000ull, "HermiteExpansion: coefficient count too large");
    offsets_.resize(static_cast<std::size_t>(max_degree) + 2, 0);
    for (int k = 0; k <= max_degree; ++k)
      offsets_[static_cast<std::size_t>(k) + 1] =
          offsets_[static_cast<std::size_t>(k)] + degree_count(dim, k);
    coeff_.assign(static_cast<std::size_t>(sz), Scalar(0.0, 0.0));
  }

  int dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  std::size_t size() const { return coeff_.size(); }

  std::size_t degree_offset(int k) const { return offsets_[static_cast<std::size_t>(k)]; }
  std::size_t degree_size(int k) const {
    return offsets_[static_cast<std::size_t>(k) + 1] - offsets_[static_cast<std::size_t>(k)];
  }

  std::size_t flat_index(std::span<const int> xi) const {
    require(static_cast<int>(xi.size()) == dim_, "HermiteExpansion: index dimension mismatch");
    int k = 0;
    for (int v : xi) {
      require(v >= 0, "HermiteExpansion: negative index entry");
      k += v;
    }
    require(k <= max_degree_, "HermiteExpansion: total degree exceeds bound");
    return degree_offset(k) + static_cast<std::size_t>(composition_rank(xi));
  }

  Scalar& at(std::span<const int> xi) { return coeff_[flat_index(xi)]; }
  const Scalar& at(std::span<const int> xi) const { return coeff_[flat_index(xi)]; }
  Scalar& at_flat(std::size_t i) { return coeff_[i]; }
  const Scalar& at_flat(std::size_t i) const { return coeff_[i]; }
  std::span<const Scalar> coefficients() const { return coeff_; }
  std::span<Scalar> coefficients() { return coeff_; }

  /// Largest degree with a nonzero coefficient, or -1 when all vanish.
  int active_degree() const {
    for (int k = max_degree_; k >= 0; --k) {
      std::size_t b = degree_offset(k), e = b + degree_size(k);
      for (std::size_t i = b; i < e; ++i)
        if (coeff_[i] != Scalar(0.0, 0.0)) return k;
    }
    return -1;
  }

  double l2_norm() const {
    double s = 0.0;
    for (const Scalar& c : coeff_) s += std::norm(c);
    return std::sqrt(s);
  }

  Scalar evaluate(std::span<const double> x) const {
    require(static_cast<int>(x.size()) == dim_, "HermiteExpansion: point dimension mismatch");
    RecurrenceCoeffs rc = recurrence_coeffs(max_degree_);
    std::vector<std::vector<double>> h(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
      h[d].resize(static_cast<std::size_t>(max_degree_) + 1);
      hermite_values_into(max_degree_, x[d], rc, h[d]);
    }
    Scalar sum(0.0, 0.0);
    for (int k = 0; k <= max_degree_; ++k) {
      std::size_t idx = degree_offset(k);
      for_each_composition(k, dim_, [&](std::span<const int> xi) {
        double basis = 1.0;
        for (std::size_t d = 0; d < xi.size(); ++d)
          basis *= h[d][static_cast<std::size_t>(xi[d])];
        sum += coeff_[idx++] * basis;
      });
    }
    return sum;
  }

  HermiteExpansion& operator*=(Scalar a) {
    for (Scalar& c : coeff_) c *= a;
    return *this;
  }

  HermiteExpansion& add_scaled(const HermiteExpansion& other, Scalar a) {
    require(dim_ == other.dim_, "HermiteExpansion: dimension mismatch");
    if (other.max_degree_ > max_degree_) {
      HermiteExpansion grown(dim_, other.max_degree_);
      for (std::size_t i = 0; i < coeff_.size(); ++i) grown.coeff_[i] = coeff_[i];
      *this = std::move(grown);
    }
    for (std::size_t i = 0; i < other.coeff_.size(); ++i) coeff_[i] += a * other.coeff_[i];
    return *this;
  }

  JsonValue to_json() const {
    JsonValue doc = JsonValue::object();
    doc.set("n", dim_);
    doc.set("N", max_degree_);
    JsonValue entries = JsonValue::array();
    for (int k = 0; k <= max_degree_; ++k) {
      std::size_t idx = degree_offset(k);
      for_each_composition(k, dim_, [&](std::span<const int> xi) {
        const Scalar& c = coeff_[idx++];
        if (c == Scalar(0.0, 0.0)) return;
        JsonValue e = JsonValue::object();
        JsonValue xs = JsonValue::array();
        for (int v : xi) xs.push(static_cast<std::int64_t>(v));
        e.set("xi", std::move(xs));
        e.set("re", c.real());
        e.set("im", c.imag());
        entries.push(std::move(e));
      });
    }
    doc.set("coeffs", std::move(entries));
    return doc;
  }

  static HermiteExpansion from_json(const nlohmann::json& j) {
    require(j.is_object(), "expansion: JSON root must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
      require(it.key() == "n" || it.key() == "N" || it.key() == "coeffs",
              "expansion: unknown field '" + it.key() + "'");
    require(j.contains("n") && j["n"].is_number_integer(), "expansion: missing integer 'n'");
    require(j.contains("N") && j["N"].is_number_integer(), "expansion: missing integer 'N'");
    require(j.contains("coeffs") && j["coeffs"].is_array(), "expansion: missing array 'coeffs'");
    HermiteExpansion f(j["n"].get<int>(), j["N"].get<int>());
    std::vector<char> seen(f.size(), 0);
    for (const auto& e : j["coeffs"]) {
      require(e.is_object(), "expansion: coefficient entries must be objects");
      for (auto it = e.begin(); it != e.end(); ++it)
        require(it.key() == "xi" || it.key() == "re" || it.key() == "im",
                "expansion: unknown coefficient field '" + it.key() + "'");
      require(e.contains("xi") && e["xi"].is_array(), "expansion: entry missing 'xi'");
      require(e.contains("re") && e["re"].is_number(), "expansion: entry missing 're'");
      require(e.contains("im") && e["im"].is_number(), "expansion: entry missing 'im'");
      std::vector<int> xi = e["xi"].get<std::vector<int>>();
      std::size_t idx = f.flat_index(xi);
      require(!seen[idx], "expansion: duplicate multi-index in 'coeffs'");
      seen[idx] = 1;
      f.coeff_[idx] = Scalar(e["re"].get<double>(), e["im"].get<double>());
    }
    return f;
  }

 private:
  int dim_ = 1;
  int max_degree_ = 0;
  std::vector<std::uint64_t> offsets_;
  std::vector<Scalar> coeff_;
};

/// Random element of V_N with independent standard normal real coefficients.
inline HermiteExpansion random_expansion(int dim, int max_degree, std::uint64_t seed) {
  HermiteExpansion f(dim, max_degree);
  Rng rng(seed);
  for (std::size_t i = 0; i < f.size(); ++i)
    f.at_flat(i) = HermiteExpansion::Scalar(rng.normal(), 0.0);
  return f;
}

}  // namespace hermlet
