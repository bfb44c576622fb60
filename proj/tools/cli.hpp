#ifndef CHATBOT_TOOLS_CLI_HPP_
#define CHATBOT_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace chatbot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRuntime = 3;

/// Runs one command line. `args` excludes the program name. Streams are
/// injected so tests can drive every subcommand except `serve` in-process.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace chatbot::cli

#endif  // CHATBOT_TOOLS_CLI_HPP_
