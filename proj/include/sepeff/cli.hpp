#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sepeff {

/// Entry point of the `sepeff` tool. Subcommands: estimate, sensitivity,
/// simulate, pseudo-assign, verify. Returns 0 on success, 2 for validation
/// errors (including bad flags), 3 for numeric failures and 4 for I/O errors;
/// on failure a single JSON line is written to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "SEPEFF_OUT_DIR";

}  // namespace sepeff
