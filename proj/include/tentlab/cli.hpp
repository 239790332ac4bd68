#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tentlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Subcommands: acim, sweep, cylinder, physicality, psi-check, render.
/// Returns 0 on success, 1 when an acceptance check fails (or a solver does
/// not converge), 2 on usage, config or I/O errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, char** argv);

}  // namespace tentlab
