#include "reltest/mmd.hpp"

#include <cmath>

namespace reltest {

namespace {

void require_zero_diagonal(const KernelMatrix& k, const char* what) {
  if (k.rows() != k.cols()) {
    throw invalid_input(std::string(what) +
                        ": within-sample block must be square");
  }
  if (k.values.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    throw invalid_input(std::string(what) +
                        ": within-sample block must have a zero diagonal");
  }
}

double offdiag_sum(const Matrix& k) { return k.sum() - k.trace(); }

}  // namespace

MmdEstimate mmd2_unbiased(const KernelMatrix& k_xx, const KernelMatrix& k_yy,
                          const KernelMatrix& k_xy) {
  const Index m = k_xx.rows();
  const Index n = k_yy.rows();
  if (k_xx.rows() != k_xx.cols() || k_yy.rows() != k_yy.cols() ||
      k_xy.rows() != m || k_xy.cols() != n) {
    throw invalid_input("mmd2_unbiased: inconsistent kernel block shapes");
  }
  if (m < 2 || n < 2) {
    throw invalid_input("mmd2_unbiased: both samples need at least 2 rows");
  }
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double value = offdiag_sum(k_xx.values) / (md * (md - 1.0)) +
                       offdiag_sum(k_yy.values) / (nd * (nd - 1.0)) -
                       2.0 * k_xy.values.sum() / (md * nd);
  if (!std::isfinite(value)) {
    throw numeric_error("mmd2_unbiased: non-finite estimate");
  }
  return MmdEstimate{value, m, n};
}

namespace {

// Empirical conditional-mean moments shared by the variance expressions.
struct Moments {
  Vector row_sums;  // per-x sums of a cross block
  Vector col_sums;  // per-y sums of a cross block
  double total;
};

Moments cross_moments(const Matrix& k_xy) {
  Moments mo;
  mo.row_sums = k_xy.rowwise().sum();
  mo.col_sums = k_xy.colwise().sum().transpose();
  mo.total = mo.row_sums.sum();
  return mo;
}

double leading_factor(double m) { return 4.0 * (m - 2.0) / (m * (m - 1.0)); }

}  // namespace

double mmd2_variance(const KernelMatrix& k_xx_tilde,
                     const KernelMatrix& k_yy_tilde,
                     const KernelMatrix& k_xy) {
  require_zero_diagonal(k_xx_tilde, "mmd2_variance");
  require_zero_diagonal(k_yy_tilde, "mmd2_variance");
  const Index m = k_xx_tilde.rows();
  const Index n = k_yy_tilde.rows();
  if (k_xy.rows() != m || k_xy.cols() != n) {
    throw invalid_input("mmd2_variance: cross block shape mismatch");
  }
  if (m < 3 || n < 2) {
    throw invalid_input("mmd2_variance: sample sizes too small");
  }
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const Vector kx1 = k_xx_tilde.values.rowwise().sum();
  const Vector ky1 = k_yy_tilde.values.rowwise().sum();
  const Moments cxy = cross_moments(k_xy.values);
  const double s_xx = kx1.sum();
  const double s_yy = ky1.sum();
  const double s_xy = cxy.total;

  double zeta1 = 0.0;
  // Var over x of the within-sample conditional mean.
  zeta1 += kx1.squaredNorm() / (md * (md - 1.0) * (md - 1.0)) -
           std::pow(s_xx / (md * (md - 1.0)), 2);
  // -2 Cov over x of (within mean, cross mean).
  zeta1 += -2.0 * (kx1.dot(cxy.row_sums) / (md * (md - 1.0) * nd) -
                   s_xx * s_xy / (md * md * (md - 1.0) * nd));
  // Same two pieces on the y side.
  zeta1 += ky1.squaredNorm() / (nd * (nd - 1.0) * (nd - 1.0)) -
           std::pow(s_yy / (nd * (nd - 1.0)), 2);
  zeta1 += -2.0 * (ky1.dot(cxy.col_sums) / (nd * (nd - 1.0) * md) -
                   s_yy * s_xy / (nd * nd * (nd - 1.0) * md));
  // Var over x and over y of the opposite-sample cross means.
  zeta1 += cxy.row_sums.squaredNorm() / (nd * nd * md) +
           cxy.col_sums.squaredNorm() / (md * md * nd) -
           2.0 * std::pow(s_xy / (nd * md), 2);
  return leading_factor(md) * zeta1;
}

double mmd2_cross_covariance(const KernelMatrix& k_xx_tilde,
                             const KernelMatrix& k_xy,
                             const KernelMatrix& k_xz) {
  require_zero_diagonal(k_xx_tilde, "mmd2_cross_covariance");
  const Index m = k_xx_tilde.rows();
  if (k_xy.rows() != m || k_xz.rows() != m) {
    throw invalid_input("mmd2_cross_covariance: cross block shape mismatch");
  }
  if (m < 3) {
    throw invalid_input("mmd2_cross_covariance: reference sample too small");
  }
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(k_xy.cols());
  const double rd = static_cast<double>(k_xz.cols());
  const Vector kx1 = k_xx_tilde.values.rowwise().sum();
  const Vector ry = k_xy.values.rowwise().sum();
  const Vector rz = k_xz.values.rowwise().sum();
  const double s_xx = kx1.sum();
  const double s_xy = ry.sum();
  const double s_xz = rz.sum();

  double zeta1 = 0.0;
  zeta1 += kx1.squaredNorm() / (md * (md - 1.0) * (md - 1.0)) -
           std::pow(s_xx / (md * (md - 1.0)), 2);
  zeta1 += -(kx1.dot(rz) / (md * (md - 1.0) * rd) -
             s_xx * s_xz / (md * md * (md - 1.0) * rd));
  zeta1 += -(kx1.dot(ry) / (md * (md - 1.0) * nd) -
             s_xx * s_xy / (md * md * (md - 1.0) * nd));
  zeta1 += ry.dot(rz) / (md * nd * rd) - s_xy * s_xz / (md * md * nd * rd);
  return leading_factor(md) * zeta1;
}

double diff_mmd_variance_direct(const KernelMatrix& k_xx_tilde,
                                const KernelMatrix& k_yy_tilde,
                                const KernelMatrix& k_zz_tilde,
                                const KernelMatrix& k_xy,
                                const KernelMatrix& k_xz) {
  require_zero_diagonal(k_xx_tilde, "diff_mmd_variance_direct");
  require_zero_diagonal(k_yy_tilde, "diff_mmd_variance_direct");
  require_zero_diagonal(k_zz_tilde, "diff_mmd_variance_direct");
  const Index m = k_xx_tilde.rows();
  const Index n = k_yy_tilde.rows();
  const Index r = k_zz_tilde.rows();
  if (m != n || m != r) {
    throw invalid_input(
        "diff_mmd_variance_direct: the joint construction needs equal "
        "sample sizes");
  }
  if (k_xy.rows() != m || k_xy.cols() != n || k_xz.rows() != m ||
      k_xz.cols() != r) {
    throw invalid_input("diff_mmd_variance_direct: cross block shape mismatch");
  }
  if (m < 3) {
    throw invalid_input("diff_mmd_variance_direct: sample size too small");
  }
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double rd = static_cast<double>(r);
  // Per-observation estimate of the conditional mean of the difference
  // kernel: the within-x terms cancel, leaving candidate-side conditional
  // means tied to the joint observation index. Taking the empirical
  // variance of this vector keeps the cross-coordinate covariance terms
  // that the split variance/covariance route treats as zero, so the two
  // routes agree statistically, not identically.
  const Vector cy = k_yy_tilde.values.rowwise().sum() / (nd - 1.0);
  const Vector cz = k_zz_tilde.values.rowwise().sum() / (rd - 1.0);
  const Vector by = k_xy.values.rowwise().sum() / nd;
  const Vector bz = k_xz.values.rowwise().sum() / rd;
  const Vector dy = k_xy.values.colwise().sum().transpose() / md;
  const Vector dz = k_xz.values.colwise().sum().transpose() / md;
  const Vector g = cy - by - dy - cz + bz + dz;
  const double g_mean = g.mean();
  const double zeta1 = g.squaredNorm() / md - g_mean * g_mean;
  return leading_factor(md) * zeta1;
}

}  // namespace reltest
