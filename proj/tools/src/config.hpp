#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ckn/energy.hpp"
#include "ckn/quadrature.hpp"

namespace ckn::cli {

// One experiment run: a command plus every knob it may consume.
struct RunConfig {
  std::string command;  // constants | liouville-check | minimize |
                        // limit-ladder | onofri-gap | counterexample | selftest
  std::string out_dir = ".";
  std::uint64_t seed = 20240817;  // bump battery sampler only

  QuadratureConfig quadrature;

  // grids
  double grid_r_min = 1e-4;
  double grid_r_max = 1e8;
  int nodes_per_decade = 16;

  SolverKnobs solver;

  // experiment inputs
  double b = 0.0;
  std::vector<double> eps_list = {0.2, 0.1, 0.05};
  double window = 5.0;
  std::vector<double> gamma_list = {0.1, 0.2, 0.3, 0.45};
  int alpha_count = 6;
  std::vector<double> rho_list = {0.5, 1.0, 2.0};
  std::vector<double> b_list = {0.0, 0.25, 0.5, 0.75};
  std::vector<double> t_list = {1e-2, 1e-3, 1e-4};
  int battery = 20;
  double epsilon = 0.2;
  int residual_nodes_per_decade = 12;
};

// Parses a key = value document (one pair per line, '#' comments).  Unknown
// keys are rejected with the line number and key name; values out of their
// documented ranges raise ParseError as well.
RunConfig parse_config(const std::string& text);

// Applies a single key=value override (the CLI flag path).
void apply_key(RunConfig& cfg, const std::string& key, const std::string& val,
               int line_no = -1);

void validate(const RunConfig& cfg);

}  // namespace ckn::cli
