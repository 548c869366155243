#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace recover {

// args excludes the program name. Exit codes: 0 ok, 2 infeasible, 3 input
// error, 4 limit reached.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace recover
