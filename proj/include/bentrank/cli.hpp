#pragma once

#include <iosfwd>

namespace bentrank {

/// Runs the command line front end. Exit status: 0 on success, 1 on a usage
/// error, 2 when an operation fails (a JSON error record goes to `err` and to
/// error.json in the output directory), 3 on an unexpected exception.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bentrank
