#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semtarget::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kIoError = 1;
inline constexpr int kUsageError = 2;
inline constexpr int kGateFailure = 3;

/// Entry point shared by the `semtarget` binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semtarget::cli
