#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ckn/energy.hpp"
#include "ckn/errors.hpp"
#include "ckn/operators.hpp"
#include "ckn/profiles.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace ckn;

namespace {

constexpr double kPi = std::numbers::pi;

QuadratureConfig tight() {
  QuadratureConfig c;
  c.abs_tol = 1e-12;
  c.rel_tol = 1e-11;
  return c;
}

using testutil::sample_compact;

}  // namespace

TEST_CASE("sigma_gamma closed values") {
  CHECK(std::abs(sigma_gamma(1, 0.5) - 1.0 / kPi) < 1e-14 / kPi);
  CHECK(std::abs(sigma_gamma(2, 0.5) - 0.5 / kPi) < 1e-14);
  // factor gamma drives the small-gamma limit
  CHECK(sigma_gamma(1, 1e-9) < 1e-8);
  // independent gamma-function oracle
  auto sig_oracle = [](int n, double g) {
    return std::pow(kPi, -0.5 * n) * std::pow(2.0, 2.0 * g) *
           oracle::gamma_fn(0.5 * n + g) / oracle::gamma_fn(1.0 - g) * g;
  };
  CHECK(sigma_gamma(2, 0.5) ==
        doctest::Approx(sig_oracle(2, 0.5)).epsilon(1e-11));
  CHECK(sigma_gamma(1, 0.25) ==
        doctest::Approx(sig_oracle(1, 0.25)).epsilon(1e-11));
  CHECK_THROWS_AS(sigma_gamma(1, 1.5), DomainError);
}

TEST_CASE("c_hardy closed values") {
  // sqrt(2) Gamma^2(3/8) / Gamma^2(1/8), frozen from the oracle
  const double expected = 0.13999967745248263;
  CHECK(c_hardy(1, 0.25) == doctest::Approx(expected).epsilon(1e-12));
  const double via_oracle = std::sqrt(2.0) *
                            std::pow(oracle::gamma_fn(0.375), 2) /
                            std::pow(oracle::gamma_fn(0.125), 2);
  CHECK(c_hardy(1, 0.25) == doctest::Approx(via_oracle).epsilon(1e-11));
  CHECK(c_hardy(1, 1e-10) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(c_hardy(1, 0.6), DomainError);
}

TEST_CASE("c_hardy quadrature route matches the closed form") {
  for (double g : {0.1, 0.25, 0.4}) {
    IntegrationResult q = c_hardy_quadrature(1, g, tight());
    CHECK(std::abs(q.value - c_hardy(1, g)) < 1e-9);
  }
}

TEST_CASE("c_gamma_alpha values and structure") {
  QuadratureConfig cfg = tight();
  CHECK(c_gamma_alpha(1, 0.3, 0.0, cfg).value == 0.0);
  // frozen by an independent adaptive quadrature of the folded integrand
  CHECK(c_gamma_alpha(1, 0.25, 0.2, cfg).value ==
        doctest::Approx(-0.67664529554172199).epsilon(1e-9));
  // alpha = (n-2g)/2 reduces to the Hardy constant
  const double lhs = c_gamma_alpha(1, 0.25, 0.25, cfg).value;
  const double rhs = -c_hardy(1, 0.25) / sigma_gamma(1, 0.25);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  // strict monotonicity in alpha below the midpoint, and the sign
  double prev = 0.0;
  for (double a : {0.05, 0.1, 0.15, 0.2}) {
    const double c = c_gamma_alpha(1, 0.3, a, cfg).value;
    CHECK(c < 0.0);
    CHECK(c < prev);
    prev = c;
  }
  // increasing past the midpoint (gamma = 0.3: midpoint 0.2, range to 0.4)
  const double c1 = c_gamma_alpha(1, 0.3, 0.25, cfg).value;
  const double c2 = c_gamma_alpha(1, 0.3, 0.35, cfg).value;
  CHECK(c2 > c1);
}

TEST_CASE("window check: 0 < c_ckn < c_hardy on a core-window sweep") {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-10;
  cfg.rel_tol = 1e-9;
  for (double g : {0.1, 0.2, 0.3, 0.45}) {
    const double cap = (1.0 - 2.0 * g) / 2.0;
    for (double frac : {0.25, 0.6, 0.9}) {
      const double a = cap * frac;
      ConstantsReport r = constants_report(1, g, a, cfg);
      CAPTURE(g);
      CAPTURE(a);
      CHECK(r.c_ckn > 0.0);
      CHECK(r.c_ckn < r.c_hardy);
    }
  }
}

TEST_CASE("kernel symmetry") {
  for (double x : {0.3, -1.2, 5.0})
    for (double y : {0.9, -0.01, 7.7})
      CHECK(kernel_G(0.3, 0.1, x, y) == kernel_G(0.3, 0.1, y, x));
}

TEST_CASE("half-Laplacian of 1/(1+x^2) on a grid") {
  auto f = [](double x) { return 1.0 / (1.0 + x * x); };
  auto exact = [](double x) {
    return (1.0 - x * x) / std::pow(1.0 + x * x, 2);
  };
  GridFunction g = GridFunction::sample(f, 1e-5, 1e5, 16, true, 2.0, 0.0);
  g.fit_tail(Extrap::Kind::power, -2.0);
  g.fit_origin(Extrap::Kind::const_plus_power, 2.0);
  QuadratureConfig cfg;
  for (double x : {0.5, 1.7, 10.0}) {
    const double got = apply_frac_laplacian(g, 0.5, x, cfg);
    CHECK(got == doctest::Approx(exact(x)).epsilon(5e-4));
  }
}

TEST_CASE("annihilation of constants") {
  GridFunction g = GridFunction::sample([](double) { return 3.7; }, 1e-4, 1e4,
                                        8, true, 0.0, 0.0);
  g.fit_tail(Extrap::Kind::const_plus_power, -1.0);
  g.fit_origin(Extrap::Kind::const_plus_power, 1.0);
  QuadratureConfig cfg;
  NonlocalOperator op(g, 0.3, 0.1, cfg);
  for (double x : {1e-3, 0.5, 12.0, 1e3})
    CHECK(std::abs(op.apply(g, x)) < 1e-10);
  // matrix route annihilates constants as well
  const std::vector<double>& M = op.matrix();
  const std::size_t m = op.dim();
  for (std::size_t i = 0; i < m; i += 7) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += M[i * m + j];
    CHECK(std::abs(s * 3.7) < 1e-9);
  }
}

TEST_CASE("matrix row reproduces pointwise application") {
  CompactProfile v = plateau(1.0, 3.0);
  GridFunction g = sample_compact(v, 1e-4, 1e3, 16);
  QuadratureConfig cfg;
  NonlocalOperator op(g, 0.3, 0.1, cfg);
  const auto& nodes = g.positive_nodes();
  const std::vector<double>& M = op.matrix();
  const std::size_t m = op.dim();
  for (std::size_t i = 10; i < m; i += 37) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += M[i * m + j] * g.values()[j];
    const double direct = op.apply(g, nodes[i]);
    CHECK(s == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("integration by parts") {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-9;
  cfg.rel_tol = 1e-8;
  CknParams prm = CknParams::make(1, 0.3, 0.1, 0.15);
  CompactProfile pu = ring(0.7, 1.6, 0.4);
  CompactProfile pv = ring(1.2, 3.0, 0.7);
  GridFunction u = sample_compact(pu, 1e-6, 1e3, 16);
  GridFunction v = sample_compact(pv, 1e-6, 1e3, 16);
  const double lhs = pairing_integral(v, u, prm, cfg).value;
  const double rhs = pairing_integral(u, v, prm, cfg).value;
  CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max({1.0, std::abs(lhs)}));
}

TEST_CASE("product formula pointwise") {
  QuadratureConfig cfg;
  CompactProfile pu = ring(0.8, 2.5, 0.5);
  CompactProfile pv = ring(1.2, 3.5, 0.6);
  GridFunction u = sample_compact(pu, 1e-5, 1e3, 24);
  GridFunction v = sample_compact(pv, 1e-5, 1e3, 24);
  std::vector<double> uv(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    uv[i] = u.values()[i] * v.values()[i];
  GridFunction w = u.with_values(uv);
  w.tail = Extrap::zero();
  w.origin = Extrap::const_plus_power(u(0.0) * v(0.0), 0.0, 1.0);
  // continuum route on interpolants: the identity is exact for the
  // evaluated functions, so agreement is at quadrature accuracy
  QuadratureConfig qcfg;
  qcfg.abs_tol = 1e-10;
  qcfg.rel_tol = 1e-9;
  RealFn uf = [&u](double y) { return u(y); };
  RealFn vf = [&v](double y) { return v(y); };
  RealFn wf = [&u, &v](double y) { return u(y) * v(y); };
  const double R = u.r_max();
  for (double x : {0.4, 1.0, 1.9, 3.0}) {
    const double lhs = apply_L_continuum(wf, 0.3, 0.1, x, R, 8.0, qcfg);
    const double rhs =
        v(x) * apply_L_continuum(uf, 0.3, 0.1, x, R, 8.0, qcfg) +
        u(x) * apply_L_continuum(vf, 0.3, 0.1, x, R, 8.0, qcfg) -
        bilinear_continuum(uf, vf, 0.3, 0.1, x, R, 8.0, qcfg);
    CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(1.0, std::abs(lhs)));
  }
  // the nodal operator satisfies the same identity to its grid-limited
  // accuracy (the product of interpolants is not the interpolant of the
  // product)
  NonlocalOperator op(u, 0.3, 0.1, cfg);
  const auto& nodes = u.positive_nodes();
  for (std::size_t i = 0; i < nodes.size(); i += 23) {
    const double x = nodes[i];
    if (x < 0.3 || x > 4.0) continue;
    const double lhs = op.apply(w, x);
    const double rhs = v(x) * op.apply(u, x) + u(x) * op.apply(v, x) -
                       op.bilinear(u, v, x);
    CHECK(std::abs(lhs - rhs) <= 2e-3 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("rescaled-operator identity") {
  // |x|^a L u = sigma^{-1} (-Lap)^g u~ + C |x|^{-2g} u~ with u~ = |x|^{-a} u
  QuadratureConfig cfg;
  const double g = 0.3, a = 0.1;
  CompactProfile pu = plateau(0.9, 2.8);
  GridFunction u = sample_compact(pu, 1e-5, 1e3, 24);
  GridFunction ut = u.map([a](double x, double val) {
    return std::pow(std::abs(x), -a) * val;
  });
  ut.tail = Extrap::zero();
  ut.origin = Extrap::power(u(0.0), -a);
  ut.origin_exponent = a;
  NonlocalOperator opL(u, g, a, cfg);
  NonlocalOperator op0(ut, g, 0.0, cfg);
  const double C = c_gamma_alpha(1, g, a, tight()).value;
  const auto& nodes = u.positive_nodes();
  for (std::size_t i = 0; i < nodes.size(); i += 29) {
    const double x = nodes[i];
    if (x < 0.4 || x > 2.5) continue;
    const double lhs = std::pow(x, a) * opL.apply(u, x);
    const double rhs = op0.apply(ut, x) + C * std::pow(x, -2.0 * g) * ut(x);
    CHECK(std::abs(lhs - rhs) <= 2e-4 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("cutoff bound: negativity and two-sided envelope") {
  QuadratureConfig cfg;
  const double g = 0.3, a = 0.05;
  CompactProfile phi = cutoff_phi();  // 1 on B1, support B2
  GridFunction gf = sample_compact(phi, 1e-5, 1e4, 16);
  NonlocalOperator op(gf, g, a, cfg);
  std::vector<double> xs = {2.5, 4.0, 8.0, 20.0, 60.0, 200.0};
  std::vector<double> vals;
  for (double x : xs) {
    const double L = op.apply(gf, x);
    CHECK(L < 0.0);
    vals.push_back(std::abs(L) * std::pow(x, 1.0 + 2.0 * g + a));
  }
  // |L phi| ~ |x|^{-1-2g-a}: compensated values stay within one fitted
  // constant of each other
  const double C1 = *std::max_element(vals.begin(), vals.end());
  const double c1 = *std::min_element(vals.begin(), vals.end());
  CHECK(C1 / c1 < 10.0);
  // inside B1 the size is controlled by |x|^{-a}
  for (double x : {0.01, 0.2, 0.9})
    CHECK(std::abs(op.apply(gf, x)) <= 10.0 * C1 * std::pow(x, -a));
}

TEST_CASE("weighted measure envelope") {
  QuadratureConfig cfg = tight();
  const double a = 0.3;
  for (double r : {0.1, 1.0, 10.0}) {
    const double x0 = r;  // |x0| <= 2r
    IntegrationResult m = weighted_measure({{x0 - r, x0 + r}}, a, cfg);
    const double ratio = m.value / std::pow(r, 1.0 - a);
    CHECK(ratio > 0.25);
    CHECK(ratio < 4.0);
  }
  for (double r : {0.1, 1.0}) {
    const double x0 = 5.0 * r;  // |x0| >= 2r
    IntegrationResult m = weighted_measure({{x0 - r, x0 + r}}, a, cfg);
    const double ratio = m.value / (r * std::pow(x0, -a));
    CHECK(ratio > 0.25);
    CHECK(ratio < 4.0);
  }
}

TEST_CASE("seminorm over the annulus pair region") {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-8;
  cfg.rel_tol = 1e-6;
  CknParams prm = CknParams::make(1, 0.3, 0.1, 0.15);
  CompactProfile pu = plateau(0.6, 2.0);
  GridFunction u = sample_compact(pu, 1e-4, 1e2, 16);
  const double x0 = 0.5, rho = 0.3, R = 1.1;
  IntegrationResult ann = seminorm_annulus(u, x0, rho, R, prm, cfg);
  IntegrationResult sR = seminorm_sq(u, {{x0 - R, x0 + R}}, prm, cfg);
  IntegrationResult sr = seminorm_sq(u, {{x0 - rho, x0 + rho}}, prm, cfg);
  CHECK(ann.value <= 2.0 * (sR.value - sr.value) + 1e-6);
  CHECK(ann.value == doctest::Approx(sR.value - sr.value).epsilon(1e-4));
}

TEST_CASE("tail of the constant function at the origin") {
  // Tail_a(1; 0, R) = 2 / (2g + a) for any R
  GridFunction one = GridFunction::sample([](double) { return 1.0; }, 1e-3,
                                          1e3, 8, true, 0.0, 0.0);
  one.fit_tail(Extrap::Kind::const_plus_power, -1.0);
  one.fit_origin(Extrap::Kind::const_plus_power, 1.0);
  CknParams prm = CknParams::make(1, 0.3, 0.1, 0.15);
  QuadratureConfig cfg = tight();
  for (double R : {0.5, 2.0}) {
    IntegrationResult t = tail_functional(one, 0.0, R, prm, cfg);
    CHECK(t.value ==
          doctest::Approx(2.0 / (2.0 * 0.3 + 0.1)).epsilon(1e-8));
  }
}

TEST_CASE("l1q of the constant function") {
  GridFunction one = GridFunction::sample([](double) { return 1.0; }, 1e-3,
                                          1e3, 8, true, 0.0, 0.0);
  one.fit_tail(Extrap::Kind::const_plus_power, -1.0);
  one.fit_origin(Extrap::Kind::const_plus_power, 1.0);
  IntegrationResult r = l1q_norm(one, 2.0, tight());
  CHECK(r.value == doctest::Approx(kPi).epsilon(1e-9));
  CHECK_THROWS_AS(l1q_norm(one, 0.9, tight()), DomainError);
}

TEST_CASE("kelvin inversion preserves p, numerator, denominator") {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-8;
  cfg.rel_tol = 1e-6;
  CknParams prm = CknParams::make(1, 0.3, 0.1, 0.15);
  CompactProfile pu = plateau(0.8, 3.0);
  GridFunction u = sample_compact(pu, 1e-4, 1e4, 24);
  auto [ub, pbar] = kelvin_invert(u, prm);
  CHECK(pbar.p == doctest::Approx(prm.p).epsilon(1e-13));
  CHECK(pbar.alpha == doctest::Approx(1.0 - 0.6 - 0.1));
  IntegrationResult n1 = weighted_norm_sq(u, prm, cfg);
  IntegrationResult n2 = weighted_norm_sq(ub, pbar, cfg);
  CHECK(n1.value == doctest::Approx(n2.value).epsilon(2e-4));
  IntegrationResult d1 = weighted_p_mass(u, prm, cfg);
  IntegrationResult d2 = weighted_p_mass(ub, pbar, cfg);
  CHECK(d1.value == doctest::Approx(d2.value).epsilon(2e-4));
}

TEST_CASE("norm equals twice the operator pairing") {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-8;
  cfg.rel_tol = 1e-6;
  CknParams prm = CknParams::make(1, 0.3, 0.1, 0.15);
  CompactProfile pu = ring(0.7, 2.0, 0.5);
  GridFunction u = sample_compact(pu, 1e-6, 1e3, 24);
  IntegrationResult norm = weighted_norm_sq(u, prm, cfg);
  const double pairing = pairing_integral(u, u, prm, cfg).value;
  CHECK(norm.value == doctest::Approx(2.0 * pairing).epsilon(2e-5));
}
