#pragma once

#include <iosfwd>

namespace iap {

/// Entry point of the iap command-line tool. Exit codes: 0 success,
/// 1 failed certificate or inequality violations, 2 bad input or
/// parameters, 3 fit refused because the cluster directions do not span.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace iap
