#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ckn/errors.hpp"
#include "config.hpp"
#include "runner.hpp"

using namespace ckn;
using namespace ckn::cli;
namespace fs = std::filesystem;

namespace {
std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("empty document yields full defaults") {
  RunConfig c = parse_config("");
  CHECK(c.command.empty());
  CHECK(c.quadrature.abs_tol == 1e-10);
  CHECK(c.nodes_per_decade == 16);
  CHECK(c.eps_list.size() == 3);
}

TEST_CASE("unknown keys are rejected by name") {
  try {
    parse_config("gama = 0.3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("gama") != std::string::npos);
    CHECK(msg.find("line 1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("command = fly-to-the-moon\n"), ParseError);
  CHECK_THROWS_AS(parse_config("abs_tol = banana\n"), ParseError);
  CHECK_THROWS_AS(parse_config("nodes_per_decade = 1000\n"), ParseError);
}

TEST_CASE("comments, blanks, and values parse") {
  RunConfig c = parse_config(
      "# a comment\n"
      "\n"
      "command = liouville-check\n"
      "b_list = 0.5\n"
      "rho_list = 1, 2\n"
      "abs_tol = 1e-9\n");
  CHECK(c.command == "liouville-check");
  CHECK(c.b_list.size() == 1);
  CHECK(c.rho_list.size() == 2);
  CHECK(c.quadrature.abs_tol == 1e-9);
}

TEST_CASE("liouville-check end to end") {
  RunConfig c = parse_config(
      "command = liouville-check\n"
      "b_list = 0.5\n"
      "rho_list = 1\n"
      "residual_nodes_per_decade = 8\n");
  c.out_dir = (fs::temp_directory_path() / "ckn_cli_liouville").string();
  fs::remove_all(c.out_dir);
  CHECK(run(c) == 0);
  std::string csv = slurp(c.out_dir + "/liouville.csv");
  CHECK(csv.find("kappa") != std::string::npos);
  CHECK(csv.find("0.5,1,") != std::string::npos);
}

TEST_CASE("selftest is deterministic and exits zero") {
  RunConfig c = parse_config("command = selftest\n");
  c.out_dir = (fs::temp_directory_path() / "ckn_cli_st_a").string();
  fs::remove_all(c.out_dir);
  CHECK(run(c) == 0);
  RunConfig c2 = c;
  c2.out_dir = (fs::temp_directory_path() / "ckn_cli_st_b").string();
  fs::remove_all(c2.out_dir);
  CHECK(run(c2) == 0);
  CHECK(slurp(c.out_dir + "/selftest.csv") ==
        slurp(c2.out_dir + "/selftest.csv"));
}

TEST_CASE("argv path: flags override and subcommands dispatch") {
  const std::string out =
      (fs::temp_directory_path() / "ckn_cli_argv").string();
  fs::remove_all(out);
  const char* argv[] = {"cknlab",     "selftest", "--out_dir",
                        out.c_str(),  "--abs_tol", "1e-9"};
  CHECK(run_main(6, argv) == 0);
  CHECK(fs::exists(out + "/selftest.csv"));
  const char* bad[] = {"cknlab", "selftest", "--abs_tol", "oops"};
  CHECK(run_main(4, bad) == 2);
}

TEST_CASE("two-rung ladder writes both artifacts") {
  RunConfig c = parse_config(
      "command = limit-ladder\n"
      "b = 0\n"
      "eps_list = 0.2, 0.1\n"
      "nodes_per_decade = 12\n"
      "n_inits = 1\n");
  c.out_dir = (fs::temp_directory_path() / "ckn_cli_ladder").string();
  fs::remove_all(c.out_dir);
  CHECK(run(c) == 0);
  std::string csv = slurp(c.out_dir + "/ladder.csv");
  CHECK(csv.find("rho_fit") != std::string::npos);
  // header + comment + two rungs
  int lines = 0;
  for (char ch : csv)
    if (ch == '\n') ++lines;
  CHECK(lines == 4);
  std::string js = slurp(c.out_dir + "/ladder.json");
  CHECK(js.find("schema_version") != std::string::npos);
  CHECK(js.find("window_eta") != std::string::npos);
}
