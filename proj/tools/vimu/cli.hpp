#pragma once

#include <iosfwd>

namespace vimu::cli {

/// Entry point shared by the `vimu` executable and the tests. Returns the
/// process exit code: 0 ok, 2 config error, 3 format or I/O error, 4
/// numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vimu::cli
