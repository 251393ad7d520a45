#pragma once

#include <iosfwd>

namespace modeshape::cli {

// Exit codes: 0 success, 1 runtime/pipeline error, 2 usage error or missing file.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace modeshape::cli
