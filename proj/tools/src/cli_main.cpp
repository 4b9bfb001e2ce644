#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ckn/errors.hpp"
#include "config.hpp"
#include "runner.hpp"

namespace ckn::cli {

int run_main(int argc, const char* const* argv) {
  CLI::App app{
      "cknlab: a numerical laboratory for the one-dimensional fractional "
      "CKN inequality and its Onofri-type limit"};
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file");
  // every config key doubles as a flag; flags override the file
  std::vector<std::pair<std::string, std::string>> overrides;
  static const char* keys[] = {
      "out_dir",      "seed",        "abs_tol",     "rel_tol",
      "r_max",        "n_cells",     "grading",     "pv_exclusion",
      "tail_order",   "grid_r_min",  "grid_r_max",  "nodes_per_decade",
      "max_iters",    "newton_iters", "newton_rounds", "tol",
      "n_inits",      "refit_every", "b",           "eps_list",
      "window",       "gamma_list",  "alpha_count", "rho_list",
      "b_list",       "t_list",      "battery",     "epsilon",
      "residual_nodes_per_decade"};
  std::map<std::string, std::string> flagvals;
  for (const char* k : keys)
    app.add_option("--" + std::string(k), flagvals[k]);

  static const char* cmds[] = {"constants",      "liouville-check",
                               "minimize",       "limit-ladder",
                               "onofri-gap",     "counterexample",
                               "selftest"};
  std::map<std::string, CLI::App*> subs;
  for (const char* c : cmds) {
    subs[c] = app.add_subcommand(c);
    subs[c]->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ParseError("cannot open config file: " + config_path);
      std::stringstream ss;
      ss << in.rdbuf();
      cfg = parse_config(ss.str());
    }
    for (const char* k : keys)
      if (!flagvals[k].empty()) apply_key(cfg, k, flagvals[k]);
    for (const char* c : cmds)
      if (subs[c]->parsed()) cfg.command = c;
    if (cfg.command.empty()) {
      std::cerr << "no command given; see --help\n";
      return 2;
    }
    validate(cfg);
    return run(cfg);
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ckn::cli

