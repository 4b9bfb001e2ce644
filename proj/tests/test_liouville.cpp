#include "doctest.h"

#include <cmath>
#include <numbers>

#include "ckn/errors.hpp"
#include "ckn/liouville.hpp"
#include "ckn/operators.hpp"

using namespace ckn;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("eta family closed values") {
  // b = 0, rho = 1 reduces to log(2/(1+x^2))
  LiouvilleParams lp{1.0, 0.0};
  CHECK(eta_family(lp, 0.7) ==
        doctest::Approx(std::log(2.0 / 1.49)).epsilon(1e-15));
  // frozen values
  CHECK(eta_family({1.0, 0.5}, 1.0) ==
        doctest::Approx(-1.5745207675794883).epsilon(1e-14));
  CHECK(eta_family({1.3, 0.3}, 2.5) ==
        doctest::Approx(-1.5365840168898646).epsilon(1e-14));
  // x -> 0 limit: log(2(1-b) cos(pi b/2) / rho)
  CHECK(eta_family({2.0, 0.5}, 1e-300) ==
        doctest::Approx(-1.0397207708399180).epsilon(1e-12));
  // b = 0, rho = 2, x = 0: log(4/4) = 0
  CHECK(eta_family({2.0, 0.0}, 1e-300) == doctest::Approx(0.0));
  CHECK_THROWS_AS(eta_family({-1.0, 0.0}, 1.0), DomainError);
  CHECK_THROWS_AS(eta_family({1.0, 1.5}, 1.0), DomainError);
}

TEST_CASE("eta family is even and decreasing in |x| for b >= 0") {
  for (double b : {0.0, 0.4, 0.8}) {
    LiouvilleParams lp{1.7, b};
    CHECK(eta_family(lp, 0.9) == eta_family(lp, -0.9));
    double prev = eta_family(lp, 1e-6);
    for (double x : {0.01, 0.1, 1.0, 10.0, 1000.0}) {
      const double cur = eta_family(lp, x);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("mass identity kappa = 2 pi (1-b)") {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-11;
  cfg.rel_tol = 1e-10;
  for (double b : {0.0, 0.5, 0.75, -0.5}) {
    for (double rho : {0.5, 1.0, 2.0}) {
      MassReport r = liouville_mass({rho, b}, cfg);
      CAPTURE(b);
      CAPTURE(rho);
      CHECK(r.rel_err < 1e-8);
      CHECK(r.kappa_exact == doctest::Approx(2.0 * kPi * (1.0 - b)));
    }
  }
}

TEST_CASE("mass is independent of rho") {
  QuadratureConfig cfg;
  for (double b : {0.2, 0.6}) {
    MassReport a = liouville_mass({0.5, b}, cfg);
    MassReport c = liouville_mass({2.0, b}, cfg);
    CHECK(a.kappa == doctest::Approx(c.kappa).epsilon(1e-8));
  }
}

TEST_CASE("membership in L^1_{1/2}") {
  QuadratureConfig cfg;
  GridFunction eta = sample_eta({1.0, 0.3}, 1e-6, 1e6, 8);
  IntegrationResult r = l1q_norm(eta, 2.0, cfg);
  CHECK(std::isfinite(r.value));
  CHECK(r.value > 0.0);
}

TEST_CASE("classical identity: residual vanishes for b = 0") {
  QuadratureConfig cfg;
  std::vector<double> nodes;
  for (double x : {0.01, 0.1, 0.5, 1.0, 3.0, 20.0, 100.0}) nodes.push_back(x);
  ResidualReport r = liouville_residual({1.0, 0.0}, nodes, 12, cfg);
  CHECK(r.max_residual < 1e-3);
}

TEST_CASE("residual decreases under node doubling") {
  QuadratureConfig cfg;
  std::vector<double> nodes;
  for (double x : {0.01, 0.1, 1.0, 4.0, 30.0, 100.0}) nodes.push_back(x);
  for (double b : {0.0, 0.5}) {
    ResidualReport coarse = liouville_residual({1.0, b}, nodes, 8, cfg);
    ResidualReport fine = liouville_residual({1.0, b}, nodes, 16, cfg);
    CAPTURE(b);
    CHECK(coarse.max_residual < 1e-3);
    CHECK(fine.max_residual * 1.8 <= coarse.max_residual);
  }
}

TEST_CASE("residual is symmetric in x") {
  QuadratureConfig cfg;
  ResidualReport r =
      liouville_residual({1.0, 0.5}, {2.0, -2.0}, 8, cfg);
  CHECK(r.residuals[0] == doctest::Approx(r.residuals[1]).epsilon(1e-13));
}

TEST_CASE("fit_rho recovers the dilation parameter") {
  // self-fit
  GridFunction samples = sample_eta({1.7, 0.3}, 1e-4, 1e4, 16);
  RhoFit fit = fit_rho(samples, 0.3);
  CHECK(fit.params.rho == doctest::Approx(1.7).epsilon(1e-6));
  CHECK(fit.fit_error < 1e-9);
}

TEST_CASE("fit_rho under perturbation") {
  GridFunction samples = sample_eta({1.0, 0.0}, 1e-4, 1e4, 16);
  // deterministic noise of amplitude 0.01
  std::vector<double> vals = samples.values();
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] += 0.01 * std::cos(7.3 * i);
  GridFunction noisy = samples.with_values(vals);
  noisy.tail = samples.tail;
  noisy.origin = samples.origin;
  RhoFit fit = fit_rho(noisy, 0.0);
  CHECK(std::abs(fit.params.rho - 1.0) < 0.02);
  // threshold knob raises FitFailed
  CHECK_THROWS_AS(fit_rho(noisy, 0.0, 5.0, 1e-6), FitFailed);
}
