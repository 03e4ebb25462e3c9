#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace screening {

// Runs the oscreen command line. `args` excludes the program name.
// Returns 0 on success, 1 on input or validation errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace screening
