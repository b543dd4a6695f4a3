// Command-line entry point: train, eval, predict, inspect-sdp, gradcheck.
#ifndef JEESDP_CLI_HPP_
#define JEESDP_CLI_HPP_

#include <iosfwd>

namespace jeesdp {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitGradcheck = 4;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jeesdp

#endif  // JEESDP_CLI_HPP_
