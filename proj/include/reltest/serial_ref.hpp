#pragma once

#include "reltest/types.hpp"

// Serial reference implementations of the parallel kernels. These use the
// direct per-entry formulas (no expanded norms, no OpenMP) and are kept as
// independent checks for the optimized paths, and for benchmarking.
namespace reltest::serial_ref {

Matrix pairwise_sq_distances(const DataMatrix& x, const DataMatrix& y);

Matrix kernel_matrix(const KernelSpec& spec, const DataMatrix& x,
                     const DataMatrix& y);

}  // namespace reltest::serial_ref
