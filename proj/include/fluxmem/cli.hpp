#pragma once

#include <iosfwd>

namespace fluxmem::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kProviderError = 2,
};

/// Entry point of the fluxmem command line: ingest, query, label, train, eval, inspect.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fluxmem::cli
