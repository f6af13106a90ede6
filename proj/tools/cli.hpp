#pragma once

#include <ostream>

namespace irpc::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;       // bad flags
inline constexpr int kInputError = 2;  // unreadable or malformed input, unwritable output
inline constexpr int kDegenerate = 3;  // the data cannot constrain the estimate
inline constexpr int kInvalid = 4;     // flag values outside their domain

// Runs `irpc <command> ...`. Reports go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace irpc::cli
