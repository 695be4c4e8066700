#pragma once

#include <ostream>

namespace crc {

/// Entry point behind the crc-clarity binary. Returns the process exit code:
/// 0 success, 1 validation or usage error, 2 runtime or backend error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crc
