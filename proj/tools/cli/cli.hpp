#pragma once

#include <iosfwd>

namespace minleaf::cli {

/// Entry point of the `minleaf` tool. Returns 0 on success, 1 on a domain
/// error (bad data, infeasible solution, failed run) and 2 on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace minleaf::cli
