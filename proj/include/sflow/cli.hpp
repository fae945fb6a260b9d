#pragma once

#include <iosfwd>

namespace sflow {

// Entry point of the command-line tool. Returns 0 on success, 1 on usage
// errors and 2 on runtime failures; reports go to `out`, diagnostics to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sflow
