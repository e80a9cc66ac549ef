#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Parses the command line, runs one subcommand, writes its outputs and the
/// run manifest, and returns the process exit status.  The result summary
/// goes to `out`; errors go to `err` as a JSON object.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sle::cli
