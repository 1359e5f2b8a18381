#include "reltest/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>

namespace reltest {

int harness_threads() {
  long n = omp_get_max_threads();
  if (const char* env = std::getenv("RELTEST_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) {
      n = std::min(n, v);
    }
  }
  return static_cast<int>(std::max(1L, n));
}

}  // namespace reltest
