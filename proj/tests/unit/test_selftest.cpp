#include <sstream>

#include "crnalloc/selftest.hpp"
#include "doctest.h"

TEST_CASE("selftest passes") {
  std::ostringstream out;
  CHECK(crnalloc::run_selftest(out, 1));
  CHECK(out.str().find("FAIL") == std::string::npos);
}
