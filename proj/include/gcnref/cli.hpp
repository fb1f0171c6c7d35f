#ifndef GCNREF_CLI_HPP
#define GCNREF_CLI_HPP

#include <string>
#include <vector>

namespace gcnref::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitEmptyRoi = 3;
inline constexpr int kExitDegenerateLabels = 4;

// Runs the full CLI (aggregate / refine / eval / synth / graph-stats) and
// returns the process exit code. Exposed as a function so tests can drive the
// tool in-process.
int run(const std::vector<std::string>& args);

}  // namespace gcnref::cli

#endif
