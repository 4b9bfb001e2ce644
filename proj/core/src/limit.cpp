#include "ckn/limit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ckn/errors.hpp"
#include "ckn/operators.hpp"

namespace ckn {

namespace {
constexpr double kPi = std::numbers::pi;
}

ScheduleParams schedule_point(double b, double epsilon) {
  if (!(b >= 0.0 && b < 1.0))
    throw InvalidSchedule("schedule: b must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw InvalidSchedule("schedule: epsilon must be > 0");
  ScheduleParams s;
  s.b = b;
  s.epsilon = epsilon;
  s.p_eps = 1.0 / epsilon;
  s.beta_eps = epsilon * (b + epsilon);
  s.alpha_eps = 0.5 * s.beta_eps;
  s.gamma_eps = 0.5 - epsilon * (1.0 - 0.5 * (b + epsilon));
  // window constraints, with the violated constraint named
  std::ostringstream why;
  if (!(s.gamma_eps > 0.0 && s.gamma_eps < 0.5))
    why << "gamma_eps = " << s.gamma_eps << " outside (0, 1/2)";
  else if (!(s.alpha_eps > 0.0 && s.alpha_eps < s.beta_eps))
    why << "alpha_eps outside (0, beta_eps)";
  else if (!(s.alpha_eps < 0.5 * (1.0 - 2.0 * s.gamma_eps)))
    why << "alpha_eps >= (1 - 2 gamma_eps)/2";
  else if (!(s.beta_eps < s.alpha_eps + s.gamma_eps))
    why << "beta_eps >= alpha_eps + gamma_eps";
  else if (!(s.p_eps > 2.0))
    why << "p_eps <= 2";
  if (why.tellp() > 0) throw InvalidSchedule("schedule: " + why.str());
  return s;
}

std::vector<ScheduleParams> make_schedule(double b,
                                          const std::vector<double>& eps) {
  if (eps.empty()) throw InvalidSchedule("schedule: empty epsilon list");
  for (std::size_t i = 1; i < eps.size(); ++i)
    if (!(eps[i] < eps[i - 1]))
      throw InvalidSchedule("schedule: epsilons must decrease");
  std::vector<ScheduleParams> out;
  out.reserve(eps.size());
  for (double e : eps) out.push_back(schedule_point(b, e));
  return out;
}

GridFunction eta_from_minimizer(const MinimizerResult& m,
                                const ScheduleParams& sched) {
  if (!m.converged)
    throw NotConverged("eta_from_minimizer: minimizer did not converge");
  const double p = sched.p_eps;
  GridFunction eta = m.u.map(
      [p](double /*x*/, double v) { return p * (v - 1.0); });
  eta.decay_exponent = m.u.decay_exponent;
  eta.origin_exponent = 0.0;
  // u -> c|x|^{-d} beyond the grid, so eta -> -p + p c |x|^{-d}
  eta.tail = Extrap::const_plus_power(-p, p * m.u.tail.c1, m.u.tail.expo);
  Extrap uo = m.u.origin;
  eta.origin = Extrap::const_plus_power(p * (uo.c0 - 1.0), p * uo.c1, uo.expo);
  return eta;
}

LadderReport run_ladder(double b, const std::vector<double>& epsilons,
                        const LadderKnobs& knobs, const QuadratureConfig& cfg) {
  LadderReport rep;
  rep.b = b;
  rep.window = knobs.window;
  std::vector<ScheduleParams> sched = make_schedule(b, epsilons);
  const double shift = std::log(sigma_gamma(1, 0.5));  // log(1/pi)

  std::vector<double> prev_eta;      // shifted eta on window nodes
  std::vector<double> window_nodes;  // shared across rungs

  for (const ScheduleParams& s : sched) {
    RungRecord r;
    r.sched = s;
    try {
      const CknParams prm = s.ckn();
      const double delta = delta_from_schedule(s);
      GridFunction init = default_initial_profile(
          prm, delta, knobs.grid_r_min, knobs.grid_r_max,
          knobs.nodes_per_decade);
      MinimizerResult best;
      bool have = false;
      for (int k = 0; k < std::max(1, knobs.solver.n_inits); ++k) {
        GridFunction ik =
            k == 0 ? init
                   : default_initial_profile(prm, delta * (1.0 + 0.5 * k),
                                             knobs.grid_r_min,
                                             knobs.grid_r_max,
                                             knobs.nodes_per_decade);
        MinimizerResult mk = minimize(prm, ik, knobs.solver, cfg);
        if (!have || (mk.converged && !best.converged) ||
            (mk.converged == best.converged &&
             mk.report.ratio < best.report.ratio)) {
          best = std::move(mk);
          have = true;
        }
      }
      r.converged = best.converged;
      r.ratio = best.report.ratio;
      r.el_residual = best.report.el_residual;
      r.lp_mass = best.report.lp_mass;

      GridFunction eta = eta_from_minimizer(best, s);
      const double q = 1.0 + 2.0 * s.gamma_eps + s.alpha_eps;
      r.l1q_eta = l1q_norm(eta, q, cfg).value;

      // shifted eta on the window
      GridFunction eta_shift = eta.map(
          [shift](double, double v) { return v + shift; });
      eta_shift.tail = eta.tail;
      eta_shift.tail.c0 += shift;
      eta_shift.origin = eta.origin;
      eta_shift.origin.c0 += shift;

      if (window_nodes.empty()) {
        for (double x : eta.positive_nodes())
          if (x <= knobs.window) window_nodes.push_back(x);
      }
      std::vector<double> cur;
      cur.reserve(window_nodes.size());
      for (double x : window_nodes) cur.push_back(eta_shift(x));
      if (!prev_eta.empty()) {
        double sd = 0.0;
        for (std::size_t i = 0;
             i < std::min(prev_eta.size(), cur.size()); ++i)
          sd = std::max(sd, std::abs(cur[i] - prev_eta[i]));
        r.sup_diff = sd;
      }
      prev_eta = cur;
      r.window_x = window_nodes;
      r.window_eta = cur;

      RhoFit fit = fit_rho(eta_shift, b, knobs.window);
      r.rho_fit = fit.params.rho;
      r.fit_err = fit.fit_error;

      // Measured mass of the shifted sample on a trusted window, closed by
      // the fitted family member beyond it.  (The discrete eta bottoms out
      // at -p_eps far out, so a full-line integral of exp(eta) would count
      // spurious mass.)
      {
        const double W = 2.0 * knobs.window;
        RealFn f = [&](double x) {
          return std::pow(std::abs(x), -b) * std::exp(eta_shift(x));
        };
        std::vector<InteriorPoint> sp;
        if (b > 0.0) sp.push_back({0.0, b});
        IntegrationResult inner = integrate_line_ex(
            f, -W, W, Endpoint::regular(), Endpoint::regular(), sp, cfg);
        RealFn ftail = [&](double x) {
          return std::pow(std::abs(x), -b) *
                 std::exp(eta_family(fit.params, x));
        };
        RealFn inv = [&](double w) {
          return (ftail(1.0 / w) + ftail(-1.0 / w)) / (w * w);
        };
        IntegrationResult outer = integrate_line_ex(
            inv, 0.0, 1.0 / W, Endpoint::singular(b), Endpoint::regular(), {},
            cfg);
        r.mass_fit = inner.value + outer.value;
      }
    } catch (const Error& e) {
      r.error = e.what();
    }
    rep.rungs.push_back(std::move(r));
  }
  return rep;
}

}  // namespace ckn
