#include "reltest/serial_ref.hpp"

#include <cmath>

namespace reltest::serial_ref {

Matrix pairwise_sq_distances(const DataMatrix& x, const DataMatrix& y) {
  if (x.cols() != y.cols()) {
    throw invalid_input("serial_ref::pairwise_sq_distances: column mismatch");
  }
  const Index m = x.rows();
  const Index n = y.rows();
  const Index d = x.cols();
  Matrix out(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Index k = 0; k < d; ++k) {
        const double diff = x(i, k) - y(j, k);
        s += diff * diff;
      }
      out(i, j) = s;
    }
  }
  return out;
}

Matrix kernel_matrix(const KernelSpec& spec, const DataMatrix& x,
                     const DataMatrix& y) {
  if (x.cols() != y.cols()) {
    throw invalid_input("serial_ref::kernel_matrix: column mismatch");
  }
  const Index m = x.rows();
  const Index n = y.rows();
  const Index d = x.cols();
  Matrix out(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (spec.kind == KernelKind::gaussian) {
        double s = 0.0;
        for (Index k = 0; k < d; ++k) {
          const double diff = x(i, k) - y(j, k);
          s += diff * diff;
        }
        out(i, j) = std::exp(-s / (2.0 * spec.bandwidth * spec.bandwidth));
      } else {
        double s = 0.0;
        for (Index k = 0; k < d; ++k) {
          s += x(i, k) * y(j, k);
        }
        out(i, j) = s;
      }
    }
  }
  return out;
}

}  // namespace reltest::serial_ref
