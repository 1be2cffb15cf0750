#pragma once

#include <iosfwd>

namespace glrds {

/// Entry point of the `glrds` tool. CSV goes to `--out` or `out`; progress
/// and diagnostics go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace glrds
