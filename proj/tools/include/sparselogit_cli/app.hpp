#pragma once

#include <sparselogit/simulation.hpp>

#include <iosfwd>
#include <string_view>

namespace sparselogit::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

// n = 200, p = 200, kappa = 0.5, s = 5, 50 replications, all four methods.
SimulationConfig fig1_desk_config();

/// Parses the command line and runs one subcommand, writing JSON to `out`
/// (or to --output) and diagnostics to `err`. Returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sparselogit::cli
