#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msast::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitIncompatible = 5;
inline constexpr int kExitMode = 6;

/// Runs one subcommand (synth, train, eval, predict, stream). `args` excludes
/// the program name. Returns the exit code; never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msast::cli
