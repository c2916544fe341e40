#pragma once

#include <cstdio>

namespace qkd::tools {

/// Fast subset of the invariant suite. Prints one [PASS]/[FAIL] line per
/// check; returns the number of failures.
int run_selftest(std::FILE* out);

}  // namespace qkd::tools
