#pragma once

namespace larvae {

/// Full command-line front end. Returns the process exit code:
/// 0 success, 1 validation error, 2 numerical failure.
int dispatch(int argc, const char* const* argv);

}  // namespace larvae
