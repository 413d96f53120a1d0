#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mono3d::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Environment variable consulted for --seed when the flag is absent.
inline constexpr const char* kSeedEnv = "MONO3D_SEED";

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mono3d::cli
