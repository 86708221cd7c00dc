#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mfanneal {

/// Command-line entry point, stream-injected so it is testable in-process.
/// `args` excludes the program name. Returns the process exit status:
/// 0 completed analysis (a detected singularity is a completed analysis),
/// 2 input/parse/capability errors, 3 numerical failure.
int run_cli(std::vector<std::string> args, std::istream& in, std::ostream& out,
            std::ostream& err);

} // namespace mfanneal
