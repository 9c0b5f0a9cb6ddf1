#pragma once

#include <iosfwd>

namespace smctrack::cli {

/// Full command-line entry point (track / eval / synth / selfcheck).
/// Returns the process exit code: 0 success, 1 selfcheck failures,
/// 2 usage, missing-file or validation errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smctrack::cli
