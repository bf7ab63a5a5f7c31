#pragma once

#include <iosfwd>

namespace stgemm::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kVerifyFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kIoOrParse = 3;

/// Entry point of the `stgemm` tool. Subcommands: gen, convert, verify, bench, gridsearch, oi.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace stgemm::cli
