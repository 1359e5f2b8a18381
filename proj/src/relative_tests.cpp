#include "reltest/relative_tests.hpp"

#include "reltest/hsic.hpp"
#include "reltest/kernels.hpp"
#include "reltest/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace reltest {

namespace {

constexpr double kDegenerateVariance = 1e-12;

double upper_tail_p(double z) { return 0.5 * std::erfc(z * M_SQRT1_2); }

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw invalid_input("alpha must lie in (0, 1)");
  }
}

// Studentize the difference; when var_diff is degenerate the asymptotic
// approximation is meaningless, so decide by the sign of the difference
// and record a warning.
void finish_test(TestResult& res) {
  res.difference = res.stat_first - res.stat_second;
  res.var_diff = res.var_first + res.var_second - 2.0 * res.covariance;
  if (res.var_diff <= kDegenerateVariance) {
    res.warnings.push_back(
        "degenerate variance of the difference; p-value determined by the "
        "sign of the statistic difference");
    res.var_diff = std::max(res.var_diff, 0.0);
    if (std::abs(res.difference) <= kDegenerateVariance) {
      res.z_score = 0.0;
      res.p_value = 0.5;
    } else if (res.difference > 0.0) {
      res.z_score = std::numeric_limits<double>::infinity();
      res.p_value = 0.0;
    } else {
      res.z_score = -std::numeric_limits<double>::infinity();
      res.p_value = 1.0;
    }
  } else {
    res.z_score = res.difference / std::sqrt(res.var_diff);
    res.p_value = upper_tail_p(res.z_score);
  }
  res.reject = res.p_value <= res.alpha;
}

std::string kernel_summary(const KernelSpec& kx, const KernelSpec& ky,
                           const KernelSpec& kz) {
  if (kx.kind == ky.kind && kx.kind == kz.kind) {
    return kernel_name(kx.kind);
  }
  return kernel_name(kx.kind) + "/" + kernel_name(ky.kind) + "/" +
         kernel_name(kz.kind);
}

double reported_bandwidth(const KernelSpec& k) {
  return k.kind == KernelKind::gaussian ? k.bandwidth : 0.0;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

TestResult relative_hsic_test(const DataMatrix& x, const DataMatrix& y,
                              const DataMatrix& z, const KernelSpec& kx,
                              const KernelSpec& ky, const KernelSpec& kz,
                              double alpha) {
  check_alpha(alpha);
  validate_data(x, "relative_hsic_test (source)");
  validate_data(y, "relative_hsic_test (first target)");
  validate_data(z, "relative_hsic_test (second target)");
  const Index m = x.rows();
  if (y.rows() != m || z.rows() != m) {
    throw invalid_input(
        "relative_hsic_test: paired observations require equal row counts");
  }
  if (m < 4) {
    throw invalid_input("relative_hsic_test: need at least 4 observations");
  }

  const KernelMatrix kt = zero_diagonal(kernel_matrix(kx, x, x));
  const KernelMatrix lt = zero_diagonal(kernel_matrix(ky, y, y));
  const KernelMatrix dt = zero_diagonal(kernel_matrix(kz, z, z));

  const double hsic_xy = hsic_unbiased(kt, lt).value;
  const double hsic_xz = hsic_unbiased(kt, dt).value;
  const Vector h_xy = hsic_h_vector(kt, lt);
  const Vector h_xz = hsic_h_vector(kt, dt);

  TestResult res;
  res.test = "relative-hsic";
  res.alpha = alpha;
  res.m = m;
  res.stat_first = hsic_xy;
  res.stat_second = hsic_xz;
  res.var_first = hsic_variance_from_h(h_xy, hsic_xy, m);
  res.var_second = hsic_variance_from_h(h_xz, hsic_xz, m);
  res.covariance = hsic_covariance_from_h(h_xy, h_xz, hsic_xy, hsic_xz, m);
  res.kernel = kernel_summary(kx, ky, kz);
  res.bandwidths = {reported_bandwidth(kx), reported_bandwidth(ky),
                    reported_bandwidth(kz)};
  finish_test(res);
  return res;
}

TestResult independent_hsic_test(const DataMatrix& x, const DataMatrix& y,
                                 const DataMatrix& z, const KernelSpec& kx,
                                 const KernelSpec& ky, const KernelSpec& kz,
                                 double alpha) {
  check_alpha(alpha);
  validate_data(x, "independent_hsic_test (source)");
  validate_data(y, "independent_hsic_test (first target)");
  validate_data(z, "independent_hsic_test (second target)");
  const Index m = x.rows();
  if (y.rows() != m || z.rows() != m) {
    throw invalid_input(
        "independent_hsic_test: paired observations require equal row counts");
  }
  if (m < 8) {
    throw invalid_input(
        "independent_hsic_test: need at least 8 observations (4 per half)");
  }
  const Index half = m / 2;

  const DataMatrix x1 = x.topRows(half);
  const DataMatrix y1 = y.topRows(half);
  const DataMatrix x2 = x.middleRows(half, half);
  const DataMatrix z2 = z.middleRows(half, half);

  const KernelMatrix kt1 = zero_diagonal(kernel_matrix(kx, x1, x1));
  const KernelMatrix lt1 = zero_diagonal(kernel_matrix(ky, y1, y1));
  const KernelMatrix kt2 = zero_diagonal(kernel_matrix(kx, x2, x2));
  const KernelMatrix dt2 = zero_diagonal(kernel_matrix(kz, z2, z2));

  const double hsic_xy = hsic_unbiased(kt1, lt1).value;
  const double hsic_xz = hsic_unbiased(kt2, dt2).value;

  TestResult res;
  res.test = "independent-hsic";
  res.alpha = alpha;
  res.m = m;
  res.stat_first = hsic_xy;
  res.stat_second = hsic_xz;
  res.var_first =
      hsic_variance_from_h(hsic_h_vector(kt1, lt1), hsic_xy, half);
  res.var_second =
      hsic_variance_from_h(hsic_h_vector(kt2, dt2), hsic_xz, half);
  res.covariance = 0.0;
  res.kernel = kernel_summary(kx, ky, kz);
  res.bandwidths = {reported_bandwidth(kx), reported_bandwidth(ky),
                    reported_bandwidth(kz)};
  finish_test(res);
  return res;
}

Matrix rotation_from_weights(const Vector& v) {
  const Index n = v.size();
  if (n < 1) {
    throw invalid_input("rotation_from_weights: empty weight vector");
  }
  if (v.cwiseAbs().maxCoeff() == 0.0) {
    throw invalid_input("rotation_from_weights: zero weight vector");
  }
  Matrix q = Matrix::Identity(n, n);
  double w1 = v[0];  // running first component of Q v
  for (Index i = 1; i < n; ++i) {
    const double theta = -std::atan2(v[i], w1);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Vector row0 = q.row(0);
    const Vector rowi = q.row(i);
    q.row(0) = c * row0 - s * rowi;
    q.row(i) = s * row0 + c * rowi;
    w1 = c * w1 - s * v[i];
  }
  return q;
}

MultiTestResult generalized_relative_hsic_test(
    const std::vector<DataMatrix>& datasets,
    const std::vector<KernelSpec>& kernels,
    const std::vector<WeightedPair>& weights, double alpha) {
  check_alpha(alpha);
  const int n_sets = static_cast<int>(datasets.size());
  if (n_sets < 2) {
    throw invalid_input(
        "generalized_relative_hsic_test: need at least two datasets");
  }
  if (kernels.size() != datasets.size()) {
    throw invalid_input(
        "generalized_relative_hsic_test: one kernel spec per dataset");
  }
  const Index m = datasets.front().rows();
  for (int i = 0; i < n_sets; ++i) {
    validate_data(datasets[i], "generalized_relative_hsic_test dataset " +
                                   std::to_string(i + 1));
    if (datasets[i].rows() != m) {
      throw invalid_input(
          "generalized_relative_hsic_test: all datasets must share the row "
          "count");
    }
  }
  if (m < 4) {
    throw invalid_input(
        "generalized_relative_hsic_test: need at least 4 observations");
  }
  if (weights.empty()) {
    throw invalid_input("generalized_relative_hsic_test: no weights given");
  }

  // Canonicalize pairs to (low, high) and merge duplicates.
  std::map<std::pair<int, int>, double> merged;
  for (const WeightedPair& w : weights) {
    int a = w.first;
    int b = w.second;
    if (a == b) {
      throw invalid_input(
          "generalized_relative_hsic_test: a weight must join two distinct "
          "datasets");
    }
    if (a > b) std::swap(a, b);
    if (a < 0 || b >= n_sets) {
      throw invalid_input(
          "generalized_relative_hsic_test: weight references a dataset index "
          "out of range");
    }
    merged[{a, b}] += w.weight;
  }
  bool any_nonzero = false;
  for (const auto& [pair, w] : merged) {
    if (w != 0.0) any_nonzero = true;
  }
  if (!any_nonzero) {
    throw invalid_input(
        "generalized_relative_hsic_test: all weights cancel to zero");
  }

  // Gram matrices only for datasets that appear in some pair.
  std::vector<KernelMatrix> tilde(n_sets);
  std::vector<bool> have(n_sets, false);
  for (const auto& [pair, w] : merged) {
    for (int idx : {pair.first, pair.second}) {
      if (!have[idx]) {
        tilde[idx] = zero_diagonal(
            kernel_matrix(kernels[idx], datasets[idx], datasets[idx]));
        have[idx] = true;
      }
    }
  }

  MultiTestResult res;
  res.alpha = alpha;
  res.m = m;
  if (merged.size() == 1) {
    res.warnings.push_back(
        "single weighted pair: the test reduces to a one-sided test of the "
        "weighted HSIC against zero");
  }
  const Index k = static_cast<Index>(merged.size());
  Vector v(k), s(k);
  std::vector<Vector> h(k);
  Index pos = 0;
  for (const auto& [pair, w] : merged) {
    res.pairs.push_back({pair.first, pair.second});
    res.weights.push_back(w);
    v[pos] = w;
    const KernelMatrix& ka = tilde[pair.first];
    const KernelMatrix& kb = tilde[pair.second];
    s[pos] = hsic_unbiased(ka, kb).value;
    h[pos] = hsic_h_vector(ka, kb);
    ++pos;
  }
  res.stats.assign(s.data(), s.data() + k);

  // Covariance: pairs sharing a dataset use the joint estimate (the
  // conditional-sum vectors are symmetric in the pair, so the shared slot
  // needs no special casing); disjoint pairs are independent.
  Matrix sigma(k, k);
  for (Index a = 0; a < k; ++a) {
    for (Index b = a; b < k; ++b) {
      const auto& pa = res.pairs[static_cast<std::size_t>(a)];
      const auto& pb = res.pairs[static_cast<std::size_t>(b)];
      const bool share = pa[0] == pb[0] || pa[0] == pb[1] || pa[1] == pb[0] ||
                         pa[1] == pb[1];
      double c = 0.0;
      if (a == b) {
        c = hsic_variance_from_h(h[a], s[a], m);
      } else if (share) {
        c = hsic_covariance_from_h(h[a], h[b], s[a], s[b], m);
      }
      sigma(a, b) = c;
      sigma(b, a) = c;
    }
  }

  // Clip negative eigenvalues so the quadratic form stays nonnegative;
  // warn only when the violation exceeds the estimation tolerance.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  const Vector evals = eig.eigenvalues();
  const double scale = std::max(evals.cwiseAbs().maxCoeff(), 1e-300);
  if (evals.minCoeff() < -1e-10 * scale) {
    res.warnings.push_back(
        "covariance estimate not positive semi-definite beyond tolerance; "
        "negative eigenvalues clipped to zero");
  }
  if (evals.minCoeff() < 0.0) {
    sigma = eig.eigenvectors() * evals.cwiseMax(0.0).asDiagonal() *
            eig.eigenvectors().transpose();
  }
  res.covariance = sigma;

  res.weighted_stat = v.dot(s);
  res.var_diff = v.dot(sigma * v);
  if (res.var_diff <= kDegenerateVariance) {
    res.warnings.push_back(
        "degenerate variance of the weighted statistic; p-value determined "
        "by its sign");
    res.var_diff = std::max(res.var_diff, 0.0);
    if (std::abs(res.weighted_stat) <= kDegenerateVariance) {
      res.z_score = 0.0;
      res.p_value = 0.5;
    } else if (res.weighted_stat > 0.0) {
      res.z_score = std::numeric_limits<double>::infinity();
      res.p_value = 0.0;
    } else {
      res.z_score = -std::numeric_limits<double>::infinity();
      res.p_value = 1.0;
    }
  } else {
    res.z_score = res.weighted_stat / std::sqrt(res.var_diff);
    res.p_value = upper_tail_p(res.z_score);
  }
  res.reject = res.p_value <= alpha;
  res.kernel = kernel_name(kernels.front().kind);
  for (std::size_t i = 1; i < kernels.size(); ++i) {
    if (kernels[i].kind != kernels.front().kind) {
      res.kernel = "mixed";
      break;
    }
  }
  for (const KernelSpec& spec : kernels) {
    res.bandwidths.push_back(reported_bandwidth(spec));
  }
  return res;
}

TestResult relative_mmd_test(const DataMatrix& x, const DataMatrix& y,
                             const DataMatrix& z,
                             const std::optional<KernelSpec>& kernel,
                             double alpha) {
  check_alpha(alpha);
  validate_data(x, "relative_mmd_test (reference)");
  validate_data(y, "relative_mmd_test (first candidate)");
  validate_data(z, "relative_mmd_test (second candidate)");
  if (x.cols() != y.cols() || x.cols() != z.cols()) {
    throw invalid_input("relative_mmd_test: column count mismatch");
  }
  if (x.rows() < 3 || y.rows() < 2 || z.rows() < 2) {
    throw invalid_input(
        "relative_mmd_test: need at least 3 reference rows and 2 rows per "
        "candidate");
  }

  const KernelSpec spec =
      kernel ? *kernel
             : KernelSpec{KernelKind::gaussian,
                          averaged_median_heuristic(x, y, z)};

  const KernelMatrix k_xx = kernel_matrix(spec, x, x);
  const KernelMatrix k_yy = kernel_matrix(spec, y, y);
  const KernelMatrix k_zz = kernel_matrix(spec, z, z);
  const KernelMatrix k_xy = kernel_matrix(spec, x, y);
  const KernelMatrix k_xz = kernel_matrix(spec, x, z);

  const MmdEstimate mmd_xy = mmd2_unbiased(k_xx, k_yy, k_xy);
  const MmdEstimate mmd_xz = mmd2_unbiased(k_xx, k_zz, k_xz);

  const KernelMatrix k_xx_t = zero_diagonal(k_xx);
  const KernelMatrix k_yy_t = zero_diagonal(k_yy);
  const KernelMatrix k_zz_t = zero_diagonal(k_zz);

  TestResult res;
  res.test = "relative-mmd";
  res.alpha = alpha;
  res.m = x.rows();
  res.n = y.rows();
  res.r = z.rows();
  res.stat_first = mmd_xy.value;
  res.stat_second = mmd_xz.value;
  res.var_first = mmd2_variance(k_xx_t, k_yy_t, k_xy);
  res.var_second = mmd2_variance(k_xx_t, k_zz_t, k_xz);
  res.covariance = mmd2_cross_covariance(k_xx_t, k_xy, k_xz);
  res.kernel = kernel_name(spec.kind);
  res.bandwidths = {reported_bandwidth(spec)};
  finish_test(res);
  return res;
}

}  // namespace reltest
