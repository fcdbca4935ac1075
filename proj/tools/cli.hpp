#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace swarnet::cli {

// Process exit codes. Stable across releases.
enum ExitCode : int {
  kExitOk = 0,
  kExitViolations = 1,      // validate found topology or scenario problems
  kExitUsage = 2,           // bad command line
  kExitUnknownScenario = 3, // neither a builtin name nor an existing file
  kExitBadConfig = 4,       // malformed scenario file, plan or flag value
  kExitMissingCsv = 5,      // plot input not found
  kExitRunFailed = 6,       // bootstrap failed or the simulation aborted
  kExitIo = 7,              // output could not be written
};

// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "SWARNET_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "swarnet-out";

// Entry point shared by the binary and the tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Parses "1,3,5" or "start:stop:step" (Mbit/s) into bit/s values.
std::vector<double> parse_loads(const std::string& text);

const char* version();

}  // namespace swarnet::cli
