// CLI - command-line pipeline driver
// Part of adaptp - adaptive climb/descent trajectory prediction
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "adaptp/perfmodel.hpp"

namespace adaptp::cli {

inline constexpr const char *kToolVersion = "0.1.0";

/// Exit codes of every command.
enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsageError = 2 };

/// Runs one command line (argv[0] is the program name). Messages go to
/// `err`; nothing is written to `out` except tables requested on stdout.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
int run(int argc, char **argv);

/// Fleet description files (JSON). "builtin" names the synthetic fleet.
std::vector<perf::AircraftConfig> load_fleet(const std::string &spec);
void save_fleet(const std::vector<perf::AircraftConfig> &fleet, const std::string &path);

} // namespace adaptp::cli
