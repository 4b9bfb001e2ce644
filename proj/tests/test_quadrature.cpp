#include "doctest.h"

#include <cmath>

#include "ckn/errors.hpp"
#include "ckn/quadrature.hpp"
#include "oracles.hpp"

using namespace ckn;

namespace {
QuadratureConfig tight() {
  QuadratureConfig c;
  c.abs_tol = 1e-12;
  c.rel_tol = 1e-11;
  return c;
}
}  // namespace

TEST_CASE("line: |x|^{-1/2} over (-1,1)") {
  auto f = [](double x) { return 1.0 / std::sqrt(std::abs(x)); };
  // split at the interior singularity through the two-sided form
  QuadratureConfig cfg = tight();
  IntegrationResult r =
      integrate_line_ex(f, -1.0, 1.0, Endpoint::regular(), Endpoint::regular(),
                        {{0.0, 0.5}}, cfg);
  CHECK(r.value == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(std::abs(r.value - 4.0) <= std::max(1e-9, 10 * r.error));
}

TEST_CASE("line: constant over (0,1)") {
  QuadratureConfig cfg = tight();
  IntegrationResult r = integrate_line([](double) { return 1.0; }, 0.0, 1.0,
                                       0.0, 0.0, cfg);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("line: Beta(0.7,0.6) endpoint singularities") {
  // frozen from the independent gamma oracle: Beta(0.7, 0.6)
  const double expected = 2.1538908711613224;
  CHECK(oracle::beta_fn(0.7, 0.6) ==
        doctest::Approx(expected).epsilon(1e-12));
  auto f = [](double x) {
    return std::pow(x, -0.3) * std::pow(1.0 - x, -0.4);
  };
  IntegrationResult r = integrate_line(f, 0.0, 1.0, 0.3, 0.4, tight());
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("line: mis-declared strength raises NonConvergent") {
  auto f = [](double x) { return std::pow(x, -0.95); };
  QuadratureConfig cfg = tight();
  cfg.max_segments = 200;
  CHECK_THROWS_AS(integrate_line(f, 0.0, 1.0, 0.0, 0.0, cfg), NonConvergent);
  CHECK_THROWS_AS(integrate_line(f, 0.0, 1.0, 1.2, 0.0, cfg), DomainError);
}

TEST_CASE("pv: odd kernels") {
  QuadratureConfig cfg = tight();
  IntegrationResult r1 =
      pv_integrate([](double x) { return 1.0 / x; }, -1.0, 1.0, 0.0, cfg);
  CHECK(std::abs(r1.value) < 1e-12);
  IntegrationResult r2 = pv_integrate(
      [](double x) { return 1.0 / (x - 0.5); }, 0.0, 1.0, 0.5, cfg);
  CHECK(std::abs(r2.value) < 1e-12);
}

TEST_CASE("pv: 1/x * (1+x) over (-1,1) -> 2") {
  QuadratureConfig cfg = tight();
  IntegrationResult r = pv_integrate(
      [](double x) { return (1.0 + x) / x; }, -1.0, 1.0, 0.0, cfg);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-11));
}

TEST_CASE("pv: stability under halving the exclusion") {
  auto g = [](double x) { return std::cos(3.0 * x) / (x - 0.25); };
  QuadratureConfig cfg = tight();
  IntegrationResult a = pv_integrate(g, -1.0, 1.0, 0.25, cfg);
  cfg.pv_exclusion *= 0.5;
  IntegrationResult b = pv_integrate(g, -1.0, 1.0, 0.25, cfg);
  CHECK(std::abs(a.value - b.value) <=
        std::max(a.error + b.error, 1e-11));
}

TEST_CASE("halfline: algebraic tails handled by inversion") {
  // int_1^inf x^{-1.2} dx = 5
  auto f = [](double x) { return std::pow(x, -1.2); };
  IntegrationResult r =
      integrate_halfline(f, 1.0, 1.2, Endpoint::regular(), tight());
  CHECK(r.value == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("real line: Cauchy mass") {
  auto f = [](double x) { return 1.0 / (1.0 + x * x); };
  IntegrationResult r = integrate_real_line(f, {}, 2.0, 1.0, tight());
  CHECK(r.value == doctest::Approx(3.14159265358979324).epsilon(1e-11));
}

TEST_CASE("plane: |x-y|^{-1/2} over (0,1)^2 -> 8/3") {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-9;
  cfg.rel_tol = 1e-8;
  auto F = [](double x, double y) {
    return 1.0 / std::sqrt(std::abs(x - y));
  };
  IntegrationResult r = integrate_plane_offdiag(F, 0.0, 1.0, 0.5, 0.0, 0.0, cfg);
  CHECK(r.value == doctest::Approx(8.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("plane: constants and cancelling kernels") {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-9;
  cfg.rel_tol = 1e-8;
  IntegrationResult r1 = integrate_plane_offdiag(
      [](double, double) { return 1.0; }, 0.0, 1.0, 0.0, 0.0, 0.0, cfg);
  CHECK(r1.value == doctest::Approx(1.0).epsilon(1e-9));
  IntegrationResult r2 = integrate_plane_offdiag(
      [](double x, double y) {
        const double d = (x - y) * (x - y);
        return d * std::pow(std::abs(x - y), -2.0);
      },
      0.0, 1.0, 0.0, 0.0, 0.0, cfg);
  CHECK(r2.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("plane: exchange symmetry is exact for symmetric F") {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-8;
  cfg.rel_tol = 1e-7;
  auto F = [](double x, double y) {
    return std::exp(-(x + y)) / std::sqrt(std::abs(x - y));
  };
  auto Fswap = [&F](double x, double y) { return F(y, x); };
  IntegrationResult a = integrate_plane_offdiag(F, 0.0, 1.0, 0.5, 0.0, 0.0, cfg);
  IntegrationResult b =
      integrate_plane_offdiag(Fswap, 0.0, 1.0, 0.5, 0.0, 0.0, cfg);
  CHECK(a.value == b.value);  // bit-identical evaluation sequence
}

TEST_CASE("refinement monotonicity of the reported estimate") {
  auto f = [](double x) { return std::pow(x, -0.3) * std::cos(x); };
  QuadratureConfig cfg = tight();
  cfg.adaptive = false;
  std::vector<double> errs, devs;
  const double ref = integrate_line(f, 0.0, 1.0, 0.3, 0.0, tight()).value;
  for (int n : {8, 16, 32, 64}) {
    cfg.n_cells = n;
    IntegrationResult r = integrate_line(f, 0.0, 1.0, 0.3, 0.0, cfg);
    errs.push_back(r.error);
    devs.push_back(std::abs(r.value - ref));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    CHECK(errs[i] <= errs[i - 1] * 1.000001 + 1e-15);
    CHECK(devs[i] <= devs[i - 1] * 1.000001 + 1e-15);
  }
}

TEST_CASE("config validation") {
  QuadratureConfig cfg;
  cfg.pv_exclusion = 1.5;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = QuadratureConfig{};
  cfg.r_max = -1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = QuadratureConfig{};
  cfg.abs_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}
