#pragma once

namespace reltest {

// Worker count for the simulation harness: the OpenMP default, optionally
// capped by the RELTEST_THREADS environment variable.
int harness_threads();

}  // namespace reltest
