// Command-line front end.
#pragma once

#include <iosfwd>
#include <string>

namespace lossdev {

inline constexpr const char* kVersion = "0.1.0";

/// Parses argv, runs one subcommand, writes CSV to `out` and a JSON run
/// manifest (or diagnostics) to `err`.
///
/// Exit codes: 0 success, 1 validation or computation failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace lossdev
