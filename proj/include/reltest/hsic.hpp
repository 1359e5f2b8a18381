#pragma once

#include "reltest/types.hpp"

namespace reltest {

// Unbiased HSIC estimator from zero-diagonal Gram matrices:
//   (1/(m(m-3))) [ Tr(KL) + (1'K1)(1'L1)/((m-1)(m-2)) - (2/(m-2)) 1'KL1 ].
// Requires square matrices of equal size m >= 4 with exactly zero diagonals.
HsicEstimate hsic_unbiased(const KernelMatrix& k_tilde,
                           const KernelMatrix& l_tilde);

// O(m^4) oracle: the same estimator written as a U-statistic, averaging the
// symmetric kernel h over all 4-tuples of distinct indices. Guarded by
// `oracle_cap` against accidental blowup; intended for small m only.
HsicEstimate hsic_naive_ustat(const KernelMatrix& k, const KernelMatrix& l,
                              Index oracle_cap = 20);

// Vector of conditional sums: entry i is the sum of h_{ijqr} over all
// ordered triples (j, q, r) of distinct indices excluding i. Computed in
// O(m^2) via a closed form validated against the triple-loop oracle.
Vector hsic_h_vector(const KernelMatrix& k_tilde, const KernelMatrix& l_tilde);

// Variance estimate of the size-m HSIC statistic: (16/m) (R - HSIC^2) with
// R = (1/m) sum_i ((m-1)_3^{-1} h_i)^2.
double hsic_variance(const KernelMatrix& k_tilde, const KernelMatrix& l_tilde);

// Covariance estimate between HSIC(X,Y) and HSIC(X,Z) sharing the source
// Gram matrix k_tilde, on the same size-m scale as hsic_variance.
double hsic_cross_covariance(const KernelMatrix& k_tilde,
                             const KernelMatrix& l_tilde,
                             const KernelMatrix& d_tilde);

// Same quantities from precomputed pieces, so test drivers can reuse the
// h-vectors across the variance and covariance terms.
double hsic_variance_from_h(const Vector& h, double hsic, Index m);
double hsic_covariance_from_h(const Vector& h_a, const Vector& h_b,
                              double hsic_a, double hsic_b, Index m);

}  // namespace reltest
