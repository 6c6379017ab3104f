#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace splitplot {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of the `splitplot` tool. `args` excludes the program name.
/// Subcommands: plan, design, eval, simulate, fit, profile.
/// Returns 0 on success, 2 on validation errors (bad flags, malformed
/// files, unknown names) and 3 on numerical failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace splitplot
