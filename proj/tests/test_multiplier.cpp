#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hermlet/expansion.hpp"
#include "hermlet/hermite.hpp"
#include "hermlet/multiplier.hpp"
#include "hermlet/rng.hpp"

using namespace hermlet;

TEST_CASE("partition of unity telescopes") {
  MultiplierSystem sys = build_partition_system();
  Rng rng(11);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double lam = rng.uniform() * std::ldexp(1.0, 18);
    double sum = 0.0;
    for (int j = 0; j <= 20; ++j) sum += sys.eval(j, lam);
    worst = std::max(worst, std::fabs(sum - 1.0));
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("profile structure") {
  MultiplierSystem sys = build_partition_system();
  CHECK(sys.eval(0, 0.0) == 1.0);
  CHECK(sys.eval(0, 0.5) == 1.0);
  CHECK(sys.eval(0, 1.0) == 0.0);
  CHECK(sys.eval(1, 0.5) == 0.0);
  CHECK(sys.eval(1, 1.0) == 1.0);
  CHECK(sys.eval(1, 2.0) == 0.0);
  CHECK(sys.eval(3, 2.0) == 0.0);
  // dilate structure: phi_j(lambda) = phi_1(2^{1-j} lambda)
  for (int j : {2, 3, 5}) {
    for (double lam : {0.3, 0.9, 1.3, 1.9}) {
      double scaled = lam * std::ldexp(1.0, j - 1);
      CHECK(sys.eval(j, scaled) == Catch::Approx(sys.eval(1, lam)).epsilon(1e-15));
    }
  }
}

TEST_CASE("lower bound certificates") {
  MultiplierSystem sys = build_partition_system();
  LowerBoundCertificate c1 = sys.certificate(1);
  CHECK(c1.band.lo == Catch::Approx(std::exp2(-0.75)));
  CHECK(c1.band.hi == Catch::Approx(std::exp2(0.75)));
  CHECK(c1.constant >= sys.c_floor());
  LowerBoundCertificate c0 = sys.certificate(0);
  CHECK(c0.constant == 1.0);  // flat region
  // infeasible floor for a sharp transition
  CHECK_THROWS_AS(build_partition_system(0.05, 2.0), validation_error);
}

TEST_CASE("derivative evaluation") {
  MultiplierSystem sys = build_partition_system();
  for (double lam : {0.6, 0.75, 0.9}) {
    double h = 1e-6;
    double fd = (sys.eval(0, lam + h) - sys.eval(0, lam - h)) / (2.0 * h);
    CHECK(sys.derivative(0, lam, 1) == Catch::Approx(fd).margin(1e-6));
  }
  CHECK(sys.derivative(0, 0.1, 1) == 0.0);  // flat near zero
  CHECK(sys.derivative(0, 0.25, 2) == Catch::Approx(0.0).margin(1e-8));
}

TEST_CASE("dual system reproduces unity") {
  MultiplierSystem sys = build_partition_system();
  MultiplierSystem dual = dual_system(sys);
  CHECK(sys.dilate_generated());
  CHECK(!dual.dilate_generated());
  CHECK(dual.certified_g_min() >= 0.25);
  Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double lam = rng.uniform() * 1000.0;
    int jhi = lam <= 1.0 ? 3 : static_cast<int>(std::ceil(std::log2(lam))) + 3;
    double sum = 0.0;
    for (int j = 0; j <= jhi; ++j) sum += sys.eval(j, lam) * dual.eval(j, lam);
    worst = std::max(worst, std::fabs(sum - 1.0));
  }
  CHECK(worst < 1e-14);
  // identical supports
  for (int j : {0, 1, 4}) {
    CHECK(MultiplierSystem::band(j).lo == MultiplierSystem::band(j).lo);
    for (double lam : {0.01, 0.3, 1.7, 9.0, 14.0}) {
      bool base_zero = sys.eval(j, lam) == 0.0;
      bool dual_zero = dual.eval(j, lam) == 0.0;
      CHECK(base_zero == dual_zero);
    }
  }
}

TEST_CASE("support index sets") {
  MultiplierSystem sys = build_partition_system();
  SupportIndexSet s10 = support_index_set(sys, 1, 1);
  CHECK(s10.k_min == 0);
  CHECK(s10.k_max == 1);  // {0, 1}
  SupportIndexSet s02 = support_index_set(sys, 0, 2);
  CHECK(s02.empty());
  // band-limitedness: every kernel coefficient degree stays below 4^j
  for (int j : {1, 2, 3, 5}) {
    CHECK(support_index_set(sys, j, 1).k_max < static_cast<std::int64_t>(std::ldexp(1.0, 2 * j)));
  }
  // counting growth: |I_{j+1}| / |I_j| within [3, 5] for j = 3..7
  for (int j = 3; j <= 7; ++j) {
    double a = static_cast<double>(support_index_set(sys, j, 1).count());
    double b = static_cast<double>(support_index_set(sys, j + 1, 1).count());
    CHECK(b / a >= 3.0);
    CHECK(b / a <= 5.0);
  }
}

TEST_CASE("apply multiplier in coefficient space") {
  MultiplierSystem sys = build_partition_system();
  // disjoint support: j = 6 touches degrees >= (4^4 - 1)/2 > 64
  HermiteExpansion f = random_expansion(1, 64, 3);
  HermiteExpansion zero = apply_multiplier(sys, 8, f);
  for (std::size_t i = 0; i < zero.size(); ++i)
    CHECK(zero.at_flat(i) == HermiteExpansion::Scalar(0.0, 0.0));
  // eigenfunction with multiplier exactly one: phi_1(sqrt(lambda_0)) = phi_1(1) = 1
  HermiteExpansion h0(1, 0);
  h0.at_flat(0) = 1.0;
  HermiteExpansion same = apply_multiplier(sys, 1, h0);
  CHECK(same.at_flat(0) == HermiteExpansion::Scalar(1.0, 0.0));
  // per-coefficient scalar oracle
  for (int j : {0, 1, 2, 3, 4}) {
    HermiteExpansion g = apply_multiplier(sys, j, f);
    SupportIndexSet is = support_index_set(sys, j, 1);
    for (int k = 0; k <= 64; ++k) {
      auto got = g.at_flat(static_cast<std::size_t>(k));
      if (!is.contains(k)) {
        CHECK(got == HermiteExpansion::Scalar(0.0, 0.0));  // bit-exact zero
      } else {
        auto expect = f.at_flat(static_cast<std::size_t>(k)) *
                      sys.eval(j, std::sqrt(eigenvalue(k, 1)));
        CHECK(std::abs(got - expect) <= 1e-15 * std::abs(expect));
      }
    }
  }
}

TEST_CASE("multiplier kernels") {
  MultiplierSystem sys = build_partition_system();
  std::vector<double> x{0.4}, y{-1.1};
  // in one dimension the lowest eigenvalue sqrt(lambda_0) = 1 sits exactly at
  // the closure of supp phi_0, where the cut vanishes; the level-0 kernel is
  // identically zero while level 1 carries it
  CHECK(multiplier_kernel(sys, 0, x, y) == 0.0);
  CHECK(multiplier_kernel(sys, 1, x, y) != 0.0);
  // empty support set gives the zero kernel (j = 0 in two dimensions)
  std::vector<double> x2{0.4, 0.2}, y2{-1.1, 0.9};
  CHECK(multiplier_kernel(sys, 0, x2, y2) == 0.0);
  // symmetry
  for (int j : {1, 2, 3}) {
    double a = multiplier_kernel(sys, j, x, y);
    double b = multiplier_kernel(sys, j, y, x);
    CHECK(a == Catch::Approx(b).epsilon(1e-14));
  }
  // adjoint identity through quadrature: <K_j(x, .), h_mu> = phi_j(sqrt(lambda_mu)) h_mu(x)
  int j = 2;
  SupportIndexSet is = support_index_set(sys, j, 1);
  int kernel_deg = static_cast<int>(is.k_max);
  for (int mu : {0, 3, 6}) {
    int order = kernel_deg + mu + 2;
    CubatureRule rule = hermite_cubature(order + order % 2);
    RecurrenceCoeffs c = recurrence_coeffs(mu);
    double ip = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      std::vector<double> node{rule.nodes[i]};
      std::vector<double> h(static_cast<std::size_t>(mu) + 1);
      hermite_values_into(mu, rule.nodes[i], c, h);
      ip += rule.weights[i] * multiplier_kernel(sys, j, x, node) * h[static_cast<std::size_t>(mu)];
    }
    auto hx = hermite_values(mu, x[0]);
    double expect = sys.eval(j, std::sqrt(eigenvalue(mu, 1))) * hx[static_cast<std::size_t>(mu)];
    CHECK(ip == Catch::Approx(expect).margin(1e-10));
  }
}

TEST_CASE("scaled kernel log matches the plain kernel") {
  MultiplierSystem sys = build_partition_system();
  for (double x : {0.0, 1.5, -2.0}) {
    for (double y : {0.3, -1.7}) {
      SignedLog sl = multiplier_kernel_log1d(sys, 3, x, y);
      std::vector<double> xv{x}, yv{y};
      double plain = multiplier_kernel(sys, 3, xv, yv);
      CHECK(sl.value() == Catch::Approx(plain).epsilon(1e-12).margin(1e-300));
    }
  }
}

TEST_CASE("finite-rank reproduction with levels up to J + 2") {
  MultiplierSystem sys = build_partition_system();
  MultiplierSystem dual = dual_system(sys);
  int J = 2;
  HermiteExpansion f = random_expansion(1, static_cast<int>(std::ldexp(1.0, 2 * J)), 9);
  HermiteExpansion sum(1, f.max_degree());
  for (int j = 0; j <= J + 2; ++j) {
    HermiteExpansion piece = apply_multiplier(sys, j, f);
    piece = apply_multiplier(dual, j, piece);
    sum.add_scaled(piece, 1.0);
  }
  double err = 0.0, nrm = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    err += std::norm(sum.at_flat(i) - f.at_flat(i));
    nrm += std::norm(f.at_flat(i));
  }
  CHECK(std::sqrt(err / nrm) < 1e-13);
}

TEST_CASE("composed kernels vanish across distant scales") {
  MultiplierSystem sys = build_partition_system();
  MultiplierSystem dual = dual_system(sys);
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(-5.0 + 0.5 * i);
  OrthogonalityReport r3 = orthogonality_check(sys, dual, 2, 5, grid, grid);
  CHECK(r3.max_abs < 1e-13);
  OrthogonalityReport r5 = orthogonality_check(sys, dual, 2, 7, grid, grid);
  CHECK(r5.empty_intersection);
  CHECK(r5.max_abs == 0.0);
  OrthogonalityReport same = orthogonality_check(sys, dual, 2, 2, grid, grid);
  CHECK(same.max_abs > 1e-6);
}

TEST_CASE("kernel decay diagnostic") {
  MultiplierSystem sys = build_partition_system();
  std::vector<double> c_fits;
  for (int j : {2, 3}) {
    auto pairs = kernel_decay_grid(j, 5.0);
    KernelDecayReport rep = kernel_decay_diagnostic(sys, j, 6, 5.0, pairs);
    CHECK(std::isfinite(rep.c_fit));
    CHECK(rep.c_fit > 0.0);
    CHECK(rep.max_violation <= 1.0 + 1e-9);  // the bound holds on the grid
    c_fits.push_back(rep.c_fit);
    // on-diagonal: |K(x,x)| <= c_fit * 2^{jn} for |x| <= 2^j
    double pow2jn = std::ldexp(1.0, j);
    for (double x : {0.0, 0.5 * pow2jn, 0.9 * pow2jn}) {
      std::vector<double> xv{x};
      CHECK(std::fabs(multiplier_kernel(sys, j, xv, xv)) <= rep.c_fit * pow2jn * (1.0 + 1e-12));
    }
  }
  CHECK(c_fits[1] / c_fits[0] < 4.0);
  CHECK(c_fits[0] / c_fits[1] < 4.0);
  std::vector<std::pair<double, double>> one_pair{{0.0, 0.0}};
  CHECK_THROWS_AS(kernel_decay_diagnostic(sys, 2, 6, 4.0, one_pair), validation_error);
}

TEST_CASE("multiplier system JSON round trip") {
  MultiplierSystem sys = build_partition_system(0.01, 0.8);
  JsonValue j = sys.to_json();
  nlohmann::json parsed = nlohmann::json::parse(j.dump());
  MultiplierSystem back = MultiplierSystem::from_json(parsed);
  CHECK(back.kind() == MultiplierSystem::Kind::partition);
  CHECK(back.c_floor() == sys.c_floor());
  CHECK(back.transition() == sys.transition());
  for (double lam : {0.2, 0.9, 3.3, 17.0})
    for (int jj : {0, 1, 3}) CHECK(back.eval(jj, lam) == sys.eval(jj, lam));
  // dual kind reconstructs as the dual
  MultiplierSystem dual = dual_system(sys);
  nlohmann::json dj = nlohmann::json::parse(dual.to_json().dump());
  MultiplierSystem dual_back = MultiplierSystem::from_json(dj);
  CHECK(dual_back.kind() == MultiplierSystem::Kind::dual);
  for (double lam : {0.2, 0.9, 3.3}) CHECK(dual_back.eval(1, lam) == dual.eval(1, lam));
}
