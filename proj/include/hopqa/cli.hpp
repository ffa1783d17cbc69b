#pragma once

#include <iosfwd>

namespace hopqa {

// Entry point of the `hopqa` tool. Returns the process exit status; errors
// are reported on `err` as {"error": <code>, "message": <text>}.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hopqa
