#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace confalyzer {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (args excludes the program name). Data goes to
/// `out`, diagnostics to `err`. Returns 0 on success, 1 on a domain error
/// and 2 on a usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace confalyzer
