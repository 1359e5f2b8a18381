#include "reltest/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace reltest {

void validate_data(const DataMatrix& x, const std::string& name) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw invalid_input(name + ": data matrix must be at least 1x1");
  }
  if (!x.allFinite()) {
    throw invalid_input(name + ": data matrix contains non-finite entries");
  }
}

void validate_kernel_spec(const KernelSpec& spec) {
  if (spec.kind == KernelKind::gaussian &&
      !(spec.bandwidth > 0.0 && std::isfinite(spec.bandwidth))) {
    throw invalid_input("kernel spec: Gaussian bandwidth must be positive");
  }
}

std::string kernel_name(KernelKind kind) {
  return kind == KernelKind::gaussian ? "gaussian" : "linear";
}

Matrix pairwise_sq_distances(const DataMatrix& x, const DataMatrix& y) {
  if (x.cols() != y.cols()) {
    throw invalid_input("pairwise_sq_distances: column count mismatch");
  }
  const Index m = x.rows();
  const Index n = y.rows();
  const Vector xs = x.rowwise().squaredNorm();
  const Vector ys = y.rowwise().squaredNorm();
  Matrix d(m, n);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      const double v = xs[i] - 2.0 * x.row(i).dot(y.row(j)) + ys[j];
      d(i, j) = v > 0.0 ? v : 0.0;  // clamp rounding residue
    }
  }
  if (&x == &y) {
    d.diagonal().setZero();
  }
  return d;
}

namespace {

// Mean of the two central order statistics for even counts.
double median_in_place(std::vector<double>& v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double hi = *mid;
  if (n % 2 == 1) {
    return hi;
  }
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

double checked_median(std::vector<double>& v, const char* what) {
  const double med = median_in_place(v);
  if (!(med > 0.0)) {
    throw numeric_error(std::string(what) +
                        ": median pairwise distance is zero (degenerate data)");
  }
  return med;
}

std::vector<double> cross_distances(const DataMatrix& x, const DataMatrix& y) {
  const Matrix d2 = pairwise_sq_distances(x, y);
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(d2.size()));
  for (Index j = 0; j < d2.cols(); ++j) {
    for (Index i = 0; i < d2.rows(); ++i) {
      d.push_back(std::sqrt(d2(i, j)));
    }
  }
  return d;
}

}  // namespace

double median_heuristic(const DataMatrix& x) {
  validate_data(x, "median_heuristic");
  const Index m = x.rows();
  if (m < 2) {
    throw invalid_input("median_heuristic: need at least 2 rows");
  }
  const Matrix d2 = pairwise_sq_distances(x, x);
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      d.push_back(std::sqrt(d2(i, j)));
    }
  }
  return checked_median(d, "median_heuristic");
}

double averaged_median_heuristic(const DataMatrix& x, const DataMatrix& y,
                                 const DataMatrix& z) {
  validate_data(x, "averaged_median_heuristic (first)");
  validate_data(y, "averaged_median_heuristic (second)");
  validate_data(z, "averaged_median_heuristic (third)");
  if (x.cols() != y.cols() || x.cols() != z.cols()) {
    throw invalid_input("averaged_median_heuristic: column count mismatch");
  }
  std::vector<double> dxy = cross_distances(x, y);
  std::vector<double> dxz = cross_distances(x, z);
  const double my = checked_median(dxy, "averaged_median_heuristic");
  const double mz = checked_median(dxz, "averaged_median_heuristic");
  return 0.5 * (my + mz);
}

KernelMatrix kernel_matrix(const KernelSpec& spec, const DataMatrix& x,
                           const DataMatrix& y) {
  validate_kernel_spec(spec);
  if (x.cols() != y.cols()) {
    throw invalid_input("kernel_matrix: column count mismatch");
  }
  Matrix k;
  if (spec.kind == KernelKind::gaussian) {
    k = pairwise_sq_distances(x, y);
    const double scale = -1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
    const Index n = k.cols();
    const Index m = k.rows();
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < m; ++i) {
        k(i, j) = std::exp(scale * k(i, j));
      }
    }
  } else {
    k = x * y.transpose();
  }
  return KernelMatrix{std::move(k), false};
}

KernelMatrix zero_diagonal(const KernelMatrix& k) {
  if (k.rows() != k.cols()) {
    throw invalid_input("zero_diagonal: matrix must be square");
  }
  KernelMatrix out{k.values, true};
  out.values.diagonal().setZero();
  return out;
}

KernelSpec gaussian_median_spec(const DataMatrix& x) {
  return KernelSpec{KernelKind::gaussian, median_heuristic(x)};
}

}  // namespace reltest
