#pragma once

#include <iosfwd>

namespace tabkit::app {

/// Entry point of the tabkit command line. Returns the process exit code:
/// 0 success, 1 usage error, 2 data error, 3 numerical failure. Errors are
/// reported as one line on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tabkit::app
