#pragma once

#include <string>
#include <vector>

#include "ckn/energy.hpp"
#include "ckn/grid.hpp"
#include "ckn/liouville.hpp"
#include "ckn/params.hpp"

namespace ckn {

// One rung of the epsilon ladder: p = 1/e, beta = e(b+e), alpha = beta/2,
// gamma = 1/2 - e [1 - (b+e)/2]  (the a = 1 normalization).
struct ScheduleParams {
  double b = 0.0;
  double epsilon = 0.0;
  double p_eps = 0.0;
  double beta_eps = 0.0;
  double alpha_eps = 0.0;
  double gamma_eps = 0.0;

  CknParams ckn() const {
    return CknParams::make(1, gamma_eps, alpha_eps, beta_eps);
  }
};

ScheduleParams schedule_point(double b, double epsilon);  // InvalidSchedule

std::vector<ScheduleParams> make_schedule(double b,
                                          const std::vector<double>& epsilons);

// eta_eps = p_eps (u_eps - 1) on the minimizer's grid.
GridFunction eta_from_minimizer(const MinimizerResult& m,
                                const ScheduleParams& sched);

struct RungRecord {
  ScheduleParams sched;
  bool converged = false;
  std::string error;  // nonempty if the rung failed
  double ratio = 0.0;
  double el_residual = 0.0;
  double lp_mass = 0.0;
  double l1q_eta = 0.0;        // ||eta_eps||_{L^1_q}, q = 1+2g+a
  double sup_diff = 0.0;       // sup|eta - eta_prev| on the window (0 on rung 1)
  double rho_fit = 0.0;
  double fit_err = 0.0;
  double mass_fit = 0.0;       // int |x|^{-b} e^{eta_shifted} by quadrature
  std::vector<double> window_x, window_eta;  // shifted eta on the window
};

struct LadderReport {
  double b = 0.0;
  double window = 5.0;
  std::vector<RungRecord> rungs;  // ordered by decreasing epsilon
};

struct LadderKnobs {
  SolverKnobs solver;
  double window = 5.0;
  double grid_r_min = 1e-5;
  double grid_r_max = 1e7;
  int nodes_per_decade = 16;
};

// Per rung: minimize, extract eta_eps, shift by log sigma_{1/2} = -log pi,
// fit rho in the b-family, measure the mass of the shifted sample, and track
// sup-differences between consecutive rungs on the window.
LadderReport run_ladder(double b, const std::vector<double>& epsilons,
                        const LadderKnobs& knobs, const QuadratureConfig& cfg);

}  // namespace ckn
