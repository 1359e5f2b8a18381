#pragma once

#include "reltest/types.hpp"

namespace reltest {

// Squared Euclidean distances between rows of X and rows of Y.
// Entry (i, j) = ||x_i - y_j||^2, clamped at zero to absorb rounding
// residue from the expanded form. When X and Y are the same object the
// diagonal is set to exactly zero.
Matrix pairwise_sq_distances(const DataMatrix& x, const DataMatrix& y);

// Median of the m(m-1)/2 distinct pairwise Euclidean distances. For even
// pair counts the median is the mean of the two central order statistics.
// Throws numeric_error when the median is zero (degenerate data).
double median_heuristic(const DataMatrix& x);

// (median of X<->Y cross distances + median of X<->Z cross distances) / 2,
// over all cross pairs.
double averaged_median_heuristic(const DataMatrix& x, const DataMatrix& y,
                                 const DataMatrix& z);

// Gaussian: exp(-||x_i - y_j||^2 / (2 sigma^2)).  Linear: <x_i, y_j>.
KernelMatrix kernel_matrix(const KernelSpec& spec, const DataMatrix& x,
                           const DataMatrix& y);

// Copy with the diagonal set to exactly zero (the "tilde" variant).
KernelMatrix zero_diagonal(const KernelMatrix& k);

// Gaussian spec with the median-heuristic bandwidth of x.
KernelSpec gaussian_median_spec(const DataMatrix& x);

}  // namespace reltest
