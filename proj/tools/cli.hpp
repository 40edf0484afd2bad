#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zeno::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kValidationFailed = 1,
  kInputError = 2,
  kDomainError = 3,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zeno::cli
