#pragma once

#include <iosfwd>

namespace divcurl::cli {

enum ExitCode : int {
  kPass = 0,
  kVerdictFail = 1,
  kConfigInvalid = 2,
  kRuntimeError = 3,
};

/// divcurl-forge <list|validate|run> [--config PATH] [--out DIR]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace divcurl::cli
