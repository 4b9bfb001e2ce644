#include "doctest.h"

#include <cmath>
#include <numbers>

#include "ckn/energy.hpp"
#include "ckn/errors.hpp"
#include "ckn/limit.hpp"
#include "ckn/liouville.hpp"
#include "ckn/operators.hpp"

using namespace ckn;

TEST_CASE("schedule arithmetic") {
  ScheduleParams s = schedule_point(0.0, 0.1);
  CHECK(s.p_eps == doctest::Approx(10.0));
  CHECK(s.beta_eps == doctest::Approx(0.01));
  CHECK(s.alpha_eps == doctest::Approx(0.005));
  CHECK(s.gamma_eps == doctest::Approx(0.405));
  ScheduleParams s2 = schedule_point(0.5, 0.05);
  CHECK(s2.gamma_eps == doctest::Approx(0.46375));
  // eps p_eps = 1 exactly; beta_eps p_eps -> b
  CHECK(s.epsilon * s.p_eps == doctest::Approx(1.0));
  CHECK(s.beta_eps * s.p_eps == doctest::Approx(0.0 + 0.1));
  // limits of the formulas
  ScheduleParams s3 = schedule_point(0.0, 1e-4);
  CHECK(s3.gamma_eps == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(s3.alpha_eps < 1e-7);
}

TEST_CASE("invalid schedules are named") {
  CHECK_THROWS_AS(schedule_point(-0.1, 0.1), InvalidSchedule);
  CHECK_THROWS_AS(schedule_point(1.0, 0.1), InvalidSchedule);
  CHECK_THROWS_AS(schedule_point(0.0, 0.6), InvalidSchedule);
  CHECK_THROWS_AS(make_schedule(0.0, {0.1, 0.2}), InvalidSchedule);
  CHECK_THROWS_AS(make_schedule(0.0, {}), InvalidSchedule);
  CHECK_NOTHROW(make_schedule(0.9, {0.02, 0.01}));
}

TEST_CASE("eta extraction from a converged minimizer") {
  ScheduleParams s = schedule_point(0.0, 0.2);
  CknParams prm = s.ckn();
  QuadratureConfig cfg;
  GridFunction init = default_initial_profile(
      prm, delta_from_schedule(s), 1e-4, 1e8, 12);
  SolverKnobs knobs;
  knobs.n_inits = 1;
  MinimizerResult m = minimize(prm, init, knobs, cfg);
  REQUIRE(m.converged);
  GridFunction eta = eta_from_minimizer(m, s);
  const auto& nodes = eta.positive_nodes();
  // max over B1 is exactly 0
  double mx = -1e300;
  for (std::size_t i = 0; i < nodes.size() && nodes[i] <= 1.0; ++i)
    mx = std::max(mx, eta.values()[i]);
  CHECK(mx == 0.0);
  // eta <= p (|x|^alpha - 1) for |x| >= 1
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] >= 1.0)
      CHECK(eta.values()[i] <=
            s.p_eps * (std::pow(nodes[i], s.alpha_eps) - 1.0) + 1e-9);
  // uniform L^1_q control
  const double q = 1.0 + 2.0 * s.gamma_eps + s.alpha_eps;
  IntegrationResult l1 = l1q_norm(eta, q, cfg);
  CHECK(std::isfinite(l1.value));
  CHECK(l1.value < 50.0);
  // equation defect of eta on a window (the bound1 identity)
  NonlocalOperator op(eta, s.gamma_eps, s.alpha_eps, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double x = nodes[i];
    if (x < 0.5 || x > 2.0) continue;
    const double lhs = std::pow(x, s.beta_eps * s.p_eps) * op.apply(eta, x);
    const double rhs =
        std::pow(1.0 + eta.values()[i] / s.p_eps, s.p_eps - 1.0);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("two-rung ladder smoke") {
  LadderKnobs knobs;
  knobs.solver.n_inits = 1;
  knobs.nodes_per_decade = 12;
  QuadratureConfig cfg;
  LadderReport rep = run_ladder(0.0, {0.2, 0.1}, knobs, cfg);
  REQUIRE(rep.rungs.size() == 2);
  for (const auto& r : rep.rungs) {
    CAPTURE(r.error);
    REQUIRE(r.error.empty());
    CHECK(r.converged);
    CHECK(r.el_residual < 1e-4);
    CHECK(r.rho_fit > 1.0);
    CHECK(r.rho_fit < 20.0);
    CHECK(std::abs(r.mass_fit - 2.0 * std::numbers::pi) <
          0.15 * 2.0 * std::numbers::pi);
  }
  CHECK(rep.rungs[1].sup_diff > 0.0);
  // lp_mass decreases toward its limit along the ladder
  CHECK(rep.rungs[1].lp_mass < rep.rungs[0].lp_mass);
}

TEST_CASE("rung failures are aggregated, later rungs still run") {
  LadderKnobs knobs;
  knobs.solver.n_inits = 1;
  knobs.solver.max_iters = 1;
  knobs.solver.newton_rounds = 0;  // guarantee non-convergence
  QuadratureConfig cfg;
  LadderReport rep = run_ladder(0.0, {0.2, 0.1}, knobs, cfg);
  REQUIRE(rep.rungs.size() == 2);
  for (const auto& r : rep.rungs) CHECK(!r.error.empty());
}
