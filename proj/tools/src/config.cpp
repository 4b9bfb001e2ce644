#include "config.hpp"

#include <sstream>

#include "ckn/errors.hpp"

namespace ckn::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    std::ostringstream os;
    os << "bad numeric value '" << v << "' for key '" << key << "'";
    if (line >= 0) os << " (line " << line << ")";
    throw ParseError(os.str());
  }
}

int to_int(const std::string& v, const std::string& key, int line) {
  return static_cast<int>(to_double(v, key, line));
}

std::vector<double> to_list(const std::string& v, const std::string& key,
                            int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(to_double(tok, key, line));
  }
  if (out.empty()) {
    std::ostringstream os;
    os << "empty list for key '" << key << "'";
    throw ParseError(os.str());
  }
  return out;
}

}  // namespace

void apply_key(RunConfig& c, const std::string& key, const std::string& val,
               int line) {
  if (key == "command") {
    c.command = val;
  } else if (key == "out_dir") {
    c.out_dir = val;
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(to_double(val, key, line));
  } else if (key == "abs_tol") {
    c.quadrature.abs_tol = to_double(val, key, line);
  } else if (key == "rel_tol") {
    c.quadrature.rel_tol = to_double(val, key, line);
  } else if (key == "r_max") {
    c.quadrature.r_max = to_double(val, key, line);
  } else if (key == "n_cells") {
    c.quadrature.n_cells = to_int(val, key, line);
  } else if (key == "grading") {
    c.quadrature.grading = to_double(val, key, line);
  } else if (key == "pv_exclusion") {
    c.quadrature.pv_exclusion = to_double(val, key, line);
  } else if (key == "tail_order") {
    c.quadrature.tail_order = to_double(val, key, line);
  } else if (key == "grid_r_min") {
    c.grid_r_min = to_double(val, key, line);
  } else if (key == "grid_r_max") {
    c.grid_r_max = to_double(val, key, line);
  } else if (key == "nodes_per_decade") {
    c.nodes_per_decade = to_int(val, key, line);
  } else if (key == "max_iters") {
    c.solver.max_iters = to_int(val, key, line);
  } else if (key == "newton_iters") {
    c.solver.newton_iters = to_int(val, key, line);
  } else if (key == "newton_rounds") {
    c.solver.newton_rounds = to_int(val, key, line);
  } else if (key == "tol") {
    c.solver.tol = to_double(val, key, line);
  } else if (key == "n_inits") {
    c.solver.n_inits = to_int(val, key, line);
  } else if (key == "refit_every") {
    c.solver.refit_every = to_int(val, key, line);
  } else if (key == "b") {
    c.b = to_double(val, key, line);
  } else if (key == "eps_list") {
    c.eps_list = to_list(val, key, line);
  } else if (key == "window") {
    c.window = to_double(val, key, line);
  } else if (key == "gamma_list") {
    c.gamma_list = to_list(val, key, line);
  } else if (key == "alpha_count") {
    c.alpha_count = to_int(val, key, line);
  } else if (key == "rho_list") {
    c.rho_list = to_list(val, key, line);
  } else if (key == "b_list") {
    c.b_list = to_list(val, key, line);
  } else if (key == "t_list") {
    c.t_list = to_list(val, key, line);
  } else if (key == "battery") {
    c.battery = to_int(val, key, line);
  } else if (key == "epsilon") {
    c.epsilon = to_double(val, key, line);
  } else if (key == "residual_nodes_per_decade") {
    c.residual_nodes_per_decade = to_int(val, key, line);
  } else {
    std::ostringstream os;
    os << "unknown key '" << key << "'";
    if (line >= 0) os << " (line " << line << ")";
    throw ParseError(os.str());
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "expected key = value (line " << line_no << ")";
      throw ParseError(os.str());
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    apply_key(c, key, val, line_no);
  }
  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  static const char* kCommands[] = {
      "constants",  "liouville-check", "minimize", "limit-ladder",
      "onofri-gap", "counterexample",  "selftest"};
  if (!c.command.empty()) {
    bool ok = false;
    for (const char* p : kCommands)
      if (c.command == p) ok = true;
    if (!ok) throw ParseError("unknown command '" + c.command + "'");
  }
  c.quadrature.validate();
  if (!(c.grid_r_min > 0.0 && c.grid_r_max > c.grid_r_min))
    throw ParseError("grid range must satisfy 0 < grid_r_min < grid_r_max");
  if (c.nodes_per_decade < 2 || c.nodes_per_decade > 256)
    throw ParseError("nodes_per_decade out of range [2, 256]");
  if (c.battery < 1 || c.battery > 1000)
    throw ParseError("battery out of range [1, 1000]");
  if (c.alpha_count < 2 || c.alpha_count > 200)
    throw ParseError("alpha_count out of range [2, 200]");
  if (!(c.window > 0.0)) throw ParseError("window must be positive");
  if (c.solver.tol <= 0.0) throw ParseError("tol must be positive");
}

}  // namespace ckn::cli
