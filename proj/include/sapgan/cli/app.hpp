#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sapgan::cli {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 2 on usage errors (unknown subcommand or flag, bad value), and
/// 1 on runtime failures such as a missing input file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sapgan::cli
