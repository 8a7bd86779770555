#pragma once

#include <iosfwd>

namespace crnalloc {

/// Fast oracle checks across all modules. Prints one PASS/FAIL line per
/// check and returns true when every check passed.
bool run_selftest(std::ostream& out, unsigned threads = 0);

}  // namespace crnalloc
