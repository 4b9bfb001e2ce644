#pragma once

#include <string>

#include "ckn/grid.hpp"
#include "ckn/operators.hpp"
#include "ckn/params.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

struct ScheduleParams;  // limit module

struct EnergyReport {
  double numerator = 0.0;    // ||u||^2_{g,a}
  double denominator = 0.0;  // (int |x|^{-bp} |u|^p)^{2/p}
  double ratio = 0.0;
  double lp_mass = 0.0;      // int |x|^{-bp} |u|^p
  double el_residual = 0.0;  // sup EL defect on the check grid
  double num_error = 0.0;
  double den_error = 0.0;
};

// Energy quotient through the double-integral quadrature route.  The
// Euler-Lagrange defect is evaluated on nodes with |x| in the check window
// against the least-squares multiplier; set with_el = false to skip it.
EnergyReport energy(const GridFunction& u, const CknParams& params,
                    const QuadratureConfig& cfg, bool with_el = true);

// Ground-state form: unweighted Gagliardo numerator plus the Hardy term with
// C_{gamma,alpha}, denominator weight |x|^{-(beta-alpha)p}.
EnergyReport energy_tilde(const GridFunction& u_tilde, const CknParams& params,
                          const QuadratureConfig& cfg);

// int |x|^{-beta p} |u|^p dx.
IntegrationResult weighted_p_mass(const GridFunction& u,
                                  const CknParams& params,
                                  const QuadratureConfig& cfg);

struct SolverKnobs {
  int max_iters = 120;     // normalized inverse-power flow iterations
  int newton_iters = 30;   // bordered-Newton steps per polish round
  int newton_rounds = 2;   // polish/rescale rounds
  double tol = 1e-4;       // residual tolerance, relative to (1/p) max RHS
  int n_inits = 2;         // initial profiles compared; lowest ratio wins
  int refit_every = 10;    // tail-exponent refit / operator rebuild cadence
  double check_lo = 1e-2;  // check-grid window for el_residual
  double check_hi = 1e2;
  std::string trace_path;  // optional per-iteration CSV (iter,ratio,el,step)
};

struct MinimizerResult {
  GridFunction u;
  EnergyReport report;
  int iterations = 0;
  bool converged = false;
  double theta = 0.0;       // multiplier of the unnormalized fixed point
  double flow_ratio = 0.0;  // discrete-quadratic-form ratio at the end
};

// Normalized inverse-power flow with descent acceptance, projections
// (positive part, evenness by construction, monotone |x|^{-alpha} u), the
// max normalization on B1, and a continuous rescale to the normal-form
// position after each step.  The flow is polished by a bordered Newton
// method carrying the multiplier theta and a dilation Lagrange multiplier
// (the quasi-dilation symmetry makes the plain system near-singular), then
// rescaled by x -> c u(Rx) so the equation constant is exactly 1/p and
// max_{B1} u = 1.
MinimizerResult minimize(const CknParams& params, const GridFunction& init,
                         const SolverKnobs& knobs,
                         const QuadratureConfig& cfg);

// (1 + x^2)^{-delta} competitor profile and its schedule-driven exponent
// delta = (1 + 4/p - 2 gamma - 2 alpha)/4.
RealFn upper_bound_test_function(double delta);
double delta_from_exponents(double p, double gamma, double alpha);
double delta_from_schedule(const ScheduleParams& sched);

// Default solver grid for a schedule point.
GridFunction default_initial_profile(const CknParams& params, double delta,
                                     double r_min, double r_max,
                                     int nodes_per_decade);

}  // namespace ckn
