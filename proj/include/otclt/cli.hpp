#pragma once

#include <string>
#include <vector>

namespace otclt {

/// Command-line entry point. Exit codes: 0 success, 1 input or
/// configuration error, 2 numerical failure. Reports are written
/// atomically (temp file + rename) when --out/--csv is given, otherwise
/// printed to stdout.
int run_cli(int argc, const char* const* argv);

/// Test-friendly overload; args excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace otclt
