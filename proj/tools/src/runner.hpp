#pragma once

#include <string>

#include "config.hpp"

namespace ckn::cli {

// Executes the configured experiment, writing CSV/JSON artifacts under
// cfg.out_dir.  Returns the process exit status: 0 on success, 1 when any
// computation failed to converge, 2 for configuration errors.
int run(const RunConfig& cfg);

// Entry point shared by main() and the CLI tests.
int run_main(int argc, const char* const* argv);

}  // namespace ckn::cli
