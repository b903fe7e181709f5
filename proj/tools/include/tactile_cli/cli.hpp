#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tactile/error.hpp"

namespace tactile::cli {

// Process exit codes. Stable across releases.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,  // bad flags, config, scenario or log contents
  kExitIo = 3,
  kExitEmpty = 4,  // the command ran but found nothing to report
};

int exit_code_for(Errc code);

// Directory used for outputs when --out is not given.
inline constexpr const char* kOutDirEnv = "TACTILE_OUT_DIR";

// Runs one subcommand. `args` excludes the program name. Reports and
// summaries go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace tactile::cli
