#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scov {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumeric = 2;

/// Runs `scov <args...>`; `args` excludes the program name. Observations for
/// `estimate` without --y or --y-file are read from `in`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in);

}  // namespace scov
