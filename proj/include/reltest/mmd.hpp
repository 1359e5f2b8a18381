#pragma once

#include "reltest/types.hpp"

namespace reltest {

// Unbiased MMD^2 estimator for samples of sizes m and n:
//   sum_{i!=j} Kxx / (m(m-1)) + sum_{i!=j} Kyy / (n(n-1)) - 2 sum Kxy / (mn).
// Accepts plain or zero-diagonal within-sample blocks.
MmdEstimate mmd2_unbiased(const KernelMatrix& k_xx, const KernelMatrix& k_yy,
                          const KernelMatrix& k_xy);

// Leading-order variance estimate of the size-m MMD^2 statistic:
//   (4(m-2)/(m(m-1))) * zeta1_hat
// with zeta1_hat assembled from the empirical conditional-mean moments.
// Within-sample blocks must be zero-diagonal; requires m >= 3, n >= 2.
double mmd2_variance(const KernelMatrix& k_xx_tilde,
                     const KernelMatrix& k_yy_tilde, const KernelMatrix& k_xy);

// Covariance estimate between MMD^2(X,Y) and MMD^2(X,Z) sharing the
// reference sample X, on the same scale as mmd2_variance.
double mmd2_cross_covariance(const KernelMatrix& k_xx_tilde,
                             const KernelMatrix& k_xy,
                             const KernelMatrix& k_xz);

// Direct variance estimate of the difference MMD^2(X,Y) - MMD^2(X,Z),
// treating (x, y, z) as one jointly sampled variable: the empirical
// variance of the per-observation conditional mean of the difference
// kernel. Exactly zero when the candidate samples coincide. Requires
// m = n = r.
double diff_mmd_variance_direct(const KernelMatrix& k_xx_tilde,
                                const KernelMatrix& k_yy_tilde,
                                const KernelMatrix& k_zz_tilde,
                                const KernelMatrix& k_xy,
                                const KernelMatrix& k_xz);

}  // namespace reltest
