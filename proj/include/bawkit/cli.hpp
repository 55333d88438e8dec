#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bawkit {

inline constexpr std::string_view kVersion = "0.1.0";

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 2,        // bad flags, unreadable or invalid configuration
  exit_physics = 3,      // evaluation failed at a frequency, or no mode found
  exit_coverage = 4,     // more than half of the sweep cells masked
  exit_no_converge = 5,  // fit report written but the optimizer did not converge
};

/// Frequency text with an optional Hz/kHz/MHz/GHz suffix (case-insensitive).
/// Bare numbers take default_pow10 (0 for Hz, 9 for GHz). Exact decimal
/// scaling; returns nullopt on malformed text or a non-positive value.
std::optional<double> parse_frequency(std::string_view text, int default_pow10 = 0);

/// Runs the tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bawkit
