#ifndef CROWD_CLI_HPP
#define CROWD_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace crowd::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kNumericalFailure = 3,
  kIoError = 4,
};

// Parses argv (argv[0] is the program name), runs the subcommand and maps
// exceptions to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crowd::cli

#endif  // CROWD_CLI_HPP
