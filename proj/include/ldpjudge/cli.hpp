#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ldpjudge/error.hpp"

namespace ldpjudge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitProvider = 3;

/// 3 for provider-side failures (transport, authentication, unusable
/// responses), 2 for everything else the library raises.
int exit_code_for(ErrorCode code);

/// Entry point. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace ldpjudge::cli
