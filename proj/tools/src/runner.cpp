#include "runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "json.hpp"

#include "ckn/energy.hpp"
#include "ckn/errors.hpp"
#include "ckn/grid.hpp"
#include "ckn/io.hpp"
#include "ckn/limit.hpp"
#include "ckn/liouville.hpp"
#include "ckn/onofri.hpp"
#include "ckn/operators.hpp"
#include "ckn/profiles.hpp"

namespace ckn::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

std::string opath(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / name).string();
}

void write_json(const RunConfig& c, const std::string& name, json j) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["payload"] = std::move(j);
  std::ofstream out(opath(c, name), std::ios::binary);
  out << doc.dump(2) << "\n";
}

int run_constants(const RunConfig& c) {
  CsvWriter csv(opath(c, "constants.csv"),
                {"n", "gamma", "alpha", "sigma_gamma", "c_gamma_alpha",
                 "c_hardy", "c_ckn", "quadrature_error"});
  for (double g : c.gamma_list) {
    const double cap = (1.0 - 2.0 * g) / 2.0;
    for (int k = 0; k < c.alpha_count; ++k) {
      const double a = cap * (k + 1) / c.alpha_count;
      ConstantsReport r = constants_report(1, g, a, c.quadrature);
      csv.row({CsvWriter::cell(1), CsvWriter::cell(g), CsvWriter::cell(a),
               CsvWriter::cell(r.sigma_gamma), CsvWriter::cell(r.c_gamma_alpha),
               CsvWriter::cell(r.c_hardy), CsvWriter::cell(r.c_ckn),
               CsvWriter::cell(r.quadrature_error)});
    }
  }
  return 0;
}

int run_liouville(const RunConfig& c) {
  CsvWriter csv(opath(c, "liouville.csv"),
                {"b", "rho", "kappa", "kappa_exact", "rel_err",
                 "max_residual"});
  std::vector<double> check = log_grid(1e-2, 1e2, 4);
  for (double b : c.b_list) {
    for (double rho : c.rho_list) {
      LiouvilleParams lp{rho, b};
      MassReport m = liouville_mass(lp, c.quadrature);
      ResidualReport rr = liouville_residual(
          lp, check, c.residual_nodes_per_decade, c.quadrature);
      csv.row({CsvWriter::cell(b), CsvWriter::cell(rho),
               CsvWriter::cell(m.kappa), CsvWriter::cell(m.kappa_exact),
               CsvWriter::cell(m.rel_err), CsvWriter::cell(rr.max_residual)});
    }
  }
  return 0;
}

int run_minimize(const RunConfig& c) {
  ScheduleParams s = schedule_point(c.b, c.epsilon);
  CknParams prm = s.ckn();
  SolverKnobs knobs = c.solver;
  knobs.trace_path = opath(c, "minimize_trace.csv");
  GridFunction init =
      default_initial_profile(prm, delta_from_schedule(s), c.grid_r_min,
                              c.grid_r_max, c.nodes_per_decade);
  MinimizerResult r = minimize(prm, init, knobs, c.quadrature);
  json j;
  j["b"] = c.b;
  j["epsilon"] = c.epsilon;
  j["p"] = s.p_eps;
  j["gamma"] = s.gamma_eps;
  j["alpha"] = s.alpha_eps;
  j["beta"] = s.beta_eps;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["theta"] = r.theta;
  j["ratio"] = r.report.ratio;
  j["numerator"] = r.report.numerator;
  j["lp_mass"] = r.report.lp_mass;
  j["el_residual"] = r.report.el_residual;
  write_json(c, "minimize.json", std::move(j));
  return r.converged ? 0 : 1;
}

int run_ladder_cmd(const RunConfig& c) {
  LadderKnobs knobs;
  knobs.solver = c.solver;
  knobs.window = c.window;
  knobs.grid_r_min = c.grid_r_min;
  knobs.grid_r_max = c.grid_r_max;
  knobs.nodes_per_decade = c.nodes_per_decade;
  LadderReport rep = run_ladder(c.b, c.eps_list, knobs, c.quadrature);
  CsvWriter csv(opath(c, "ladder.csv"),
                {"epsilon", "ratio", "el_residual", "sup_diff", "rho_fit",
                 "fit_err", "mass_fit"});
  json rungs = json::array();
  bool all_ok = true;
  for (const RungRecord& r : rep.rungs) {
    csv.row({CsvWriter::cell(r.sched.epsilon), CsvWriter::cell(r.ratio),
             CsvWriter::cell(r.el_residual), CsvWriter::cell(r.sup_diff),
             CsvWriter::cell(r.rho_fit), CsvWriter::cell(r.fit_err),
             CsvWriter::cell(r.mass_fit)});
    json rj;
    rj["epsilon"] = r.sched.epsilon;
    rj["p"] = r.sched.p_eps;
    rj["gamma"] = r.sched.gamma_eps;
    rj["alpha"] = r.sched.alpha_eps;
    rj["beta"] = r.sched.beta_eps;
    rj["converged"] = r.converged;
    rj["error"] = r.error;
    rj["ratio"] = r.ratio;
    rj["el_residual"] = r.el_residual;
    rj["lp_mass"] = r.lp_mass;
    rj["l1q_eta"] = r.l1q_eta;
    rj["sup_diff"] = r.sup_diff;
    rj["rho_fit"] = r.rho_fit;
    rj["fit_err"] = r.fit_err;
    rj["mass_fit"] = r.mass_fit;
    rj["window_x"] = r.window_x;
    rj["window_eta"] = r.window_eta;
    rungs.push_back(std::move(rj));
    if (!r.error.empty() || !r.converged) all_ok = false;
  }
  json j;
  j["b"] = rep.b;
  j["window"] = rep.window;
  j["rungs"] = std::move(rungs);
  write_json(c, "ladder.json", std::move(j));
  return all_ok ? 0 : 1;
}

int run_onofri(const RunConfig& c) {
  CsvWriter csv(opath(c, "onofri.csv"),
                {"v_id", "b", "rho", "lhs", "quad_term", "mean_term", "gap",
                 "error_bar"});
  std::vector<CompactProfile> battery = bump_battery(c.battery, c.seed);
  for (double b : c.b_list) {
    if (!(b > -1.0 && b < 1.0)) continue;
    LiouvilleParams lp{1.0, b};
    int id = 0;
    for (const CompactProfile& v : battery) {
      GapReport g = onofri_gap(v, lp, c.quadrature);
      csv.row({"bump" + std::to_string(id), CsvWriter::cell(b),
               CsvWriter::cell(lp.rho), CsvWriter::cell(g.lhs),
               CsvWriter::cell(g.quad_term), CsvWriter::cell(g.mean_term),
               CsvWriter::cell(g.gap), CsvWriter::cell(g.error_bar)});
      ++id;
    }
  }
  return 0;
}

int run_counterexample(const RunConfig& c) {
  const double b = c.b < 0.0 ? c.b : -0.5;
  LiouvilleParams lp{1.0, b};
  CsvWriter csv(opath(c, "counterexample.csv"),
                {"v_id", "b", "rho", "lhs", "quad_term", "mean_term", "gap",
                 "error_bar"});
  for (double t : c.t_list) {
    GapReport g = counterexample_gap(b, t, lp, c.quadrature);
    csv.row({"t=" + format_g17(t), CsvWriter::cell(b),
             CsvWriter::cell(lp.rho), CsvWriter::cell(g.lhs),
             CsvWriter::cell(g.quad_term), CsvWriter::cell(g.mean_term),
             CsvWriter::cell(g.gap), CsvWriter::cell(g.error_bar)});
  }
  return 0;
}

int run_selftest(const RunConfig& c) {
  CsvWriter csv(opath(c, "selftest.csv"),
                {"module", "case", "value", "expected", "pass"});
  QuadratureConfig q = c.quadrature;
  int failures = 0;
  auto row = [&](const std::string& mod, const std::string& name, double got,
                 double want, double tol) {
    const bool ok = std::abs(got - want) <= tol;
    if (!ok) ++failures;
    csv.row({mod, name, CsvWriter::cell(got), CsvWriter::cell(want),
             ok ? "1" : "0"});
  };

  row("quadrature", "abs_sqrt_inverse",
      integrate_line_ex([](double x) { return 1.0 / std::sqrt(std::abs(x)); },
                        -1.0, 1.0, Endpoint::regular(), Endpoint::regular(),
                        {{0.0, 0.5}}, q)
          .value,
      4.0, 1e-8);
  row("quadrature", "unit_constant",
      integrate_line([](double) { return 1.0; }, 0.0, 1.0, 0.0, 0.0, q).value,
      1.0, 1e-12);
  row("quadrature", "pv_odd",
      pv_integrate([](double x) { return 1.0 / x; }, -1.0, 1.0, 0.0, q).value,
      0.0, 1e-10);
  row("quadrature", "pv_shifted",
      pv_integrate([](double x) { return (1.0 + x) / x; }, -1.0, 1.0, 0.0, q)
          .value,
      2.0, 1e-9);
  row("quadrature", "plane_constant",
      integrate_plane_offdiag([](double, double) { return 1.0; }, 0.0, 1.0,
                              0.0, 0.0, 0.0, q)
          .value,
      1.0, 1e-8);
  row("quadrature", "plane_cancelling",
      integrate_plane_offdiag(
          [](double x, double y) {
            return (x - y) * (x - y) * std::pow(std::abs(x - y), -2.0);
          },
          0.0, 1.0, 0.0, 0.0, 0.0, q)
          .value,
      1.0, 1e-8);

  row("operators", "sigma_half_pi", sigma_gamma(1, 0.5) * kPi, 1.0, 1e-14);
  row("operators", "hardy_gamma_zero_limit", c_hardy(1, 1e-10), 1.0, 1e-8);
  row("operators", "c_gamma_zero",
      c_gamma_alpha(1, 0.3, 0.0, q).value, 0.0, 1e-12);
  {
    GridFunction one = GridFunction::sample([](double) { return 1.0; }, 1e-3,
                                            1e3, 8, true, 0.0, 0.0);
    one.fit_tail(Extrap::Kind::const_plus_power, -1.0);
    one.fit_origin(Extrap::Kind::const_plus_power, 1.0);
    CknParams prm = CknParams::make(1, 0.3, 0.1, 0.15);
    row("operators", "annihilates_constants",
        apply_L(one, prm, 1.0, q), 0.0, 1e-10);
    row("operators", "l1q_of_one", l1q_norm(one, 2.0, q).value, kPi, 1e-8);
  }

  row("energy", "sobolev_exponent", exponent_p(1, 0.3, 0.1, 0.1), 5.0, 1e-12);
  row("energy", "upper_bound_profile_origin",
      upper_bound_test_function(0.145)(0.0), 1.0, 0.0);

  row("liouville", "eta_b0",
      eta_family({1.0, 0.0}, 0.7), std::log(2.0 / 1.49), 1e-14);
  row("liouville", "eta_center_rho2",
      eta_family({2.0, 0.0}, 1e-300), 0.0, 1e-14);
  row("liouville", "mass_b0", liouville_mass({1.0, 0.0}, q).kappa,
      2.0 * kPi, 1e-7);
  {
    ResidualReport rr = liouville_residual({1.0, 0.5}, {2.0, -2.0}, 8, q);
    row("liouville", "residual_even",
        rr.residuals[0] - rr.residuals[1], 0.0, 1e-12);
  }

  {
    ScheduleParams s = schedule_point(0.0, 0.1);
    row("limit", "schedule_p", s.p_eps, 10.0, 1e-12);
    row("limit", "schedule_gamma", s.gamma_eps, 0.405, 1e-12);
  }

  {
    GridFunction z = GridFunction::sample([](double) { return 0.0; }, 1e-2,
                                          1e2, 8, true, 8.0, 0.0);
    z.tail = Extrap::zero();
    z.origin = Extrap::zero();
    GapReport g = onofri_gap(z, {1.0, 0.0}, q);
    row("onofri", "gap_of_zero", g.gap, 0.0, 1e-10);
    CompactProfile v = counterexample_family(-0.5, 1e-3);
    row("onofri", "counterexample_plateau", v(1.0),
        3.0 * std::log(1e3), 1e-10);
  }

  csv.close();
  return failures == 0 ? 0 : 1;
}

}  // namespace

int run(const RunConfig& cfg) {
  try {
    validate(cfg);
    if (cfg.command == "constants") return run_constants(cfg);
    if (cfg.command == "liouville-check") return run_liouville(cfg);
    if (cfg.command == "minimize") return run_minimize(cfg);
    if (cfg.command == "limit-ladder") return run_ladder_cmd(cfg);
    if (cfg.command == "onofri-gap") return run_onofri(cfg);
    if (cfg.command == "counterexample") return run_counterexample(cfg);
    if (cfg.command == "selftest") return run_selftest(cfg);
    throw ParseError("no command given");
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    // structured error log, one JSON object per line
    try {
      std::ofstream log(opath(cfg, "error_log.jsonl"),
                        std::ios::binary | std::ios::app);
      json j;
      j["command"] = cfg.command;
      j["error"] = e.what();
      log << j.dump() << "\n";
    } catch (...) {
    }
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ckn::cli
