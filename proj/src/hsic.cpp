#include "reltest/hsic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace reltest {

namespace {

void require_square_pair(const KernelMatrix& k, const KernelMatrix& l,
                         Index min_m, const char* what) {
  if (k.rows() != k.cols() || l.rows() != l.cols() || k.rows() != l.rows()) {
    throw invalid_input(std::string(what) +
                        ": kernel matrices must be square and equally sized");
  }
  if (k.rows() < min_m) {
    throw invalid_input(std::string(what) + ": sample size too small");
  }
}

void require_zero_diagonal(const KernelMatrix& k, const char* what) {
  if (k.values.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    throw invalid_input(std::string(what) +
                        ": kernel matrix must have a zero diagonal");
  }
}

// Shared O(m^2) reductions over a zero-diagonal pair.
struct PairSums {
  Vector k1, l1;      // row sums
  double tr_kl;       // sum_ij K_ij L_ij
  double s_k, s_l;    // 1'K1, 1'L1
  double okl;         // 1'KL1 = (K1).(L1) for symmetric K
};

PairSums pair_sums(const Matrix& k, const Matrix& l) {
  PairSums s;
  s.k1 = k.rowwise().sum();
  s.l1 = l.rowwise().sum();
  s.tr_kl = k.cwiseProduct(l).sum();
  s.s_k = s.k1.sum();
  s.s_l = s.l1.sum();
  s.okl = s.k1.dot(s.l1);
  return s;
}

double falling_three(Index m) {
  return static_cast<double>(m - 1) * static_cast<double>(m - 2) *
         static_cast<double>(m - 3);
}

}  // namespace

HsicEstimate hsic_unbiased(const KernelMatrix& k_tilde,
                           const KernelMatrix& l_tilde) {
  require_square_pair(k_tilde, l_tilde, 4, "hsic_unbiased");
  require_zero_diagonal(k_tilde, "hsic_unbiased");
  require_zero_diagonal(l_tilde, "hsic_unbiased");
  const Index m = k_tilde.rows();
  const double md = static_cast<double>(m);
  const PairSums s = pair_sums(k_tilde.values, l_tilde.values);
  const double value =
      (s.tr_kl + s.s_k * s.s_l / ((md - 1.0) * (md - 2.0)) -
       2.0 / (md - 2.0) * s.okl) /
      (md * (md - 3.0));
  if (!std::isfinite(value)) {
    throw numeric_error("hsic_unbiased: non-finite estimate");
  }
  return HsicEstimate{value, m};
}

namespace {

// Mean of k_st (l_st + l_uv - 2 l_su) over the 24 orderings of a 4-tuple.
double h_tuple(const Matrix& k, const Matrix& l, std::array<Index, 4> idx) {
  std::sort(idx.begin(), idx.end());
  double sum = 0.0;
  do {
    const Index s = idx[0], t = idx[1], u = idx[2], v = idx[3];
    sum += k(s, t) * (l(s, t) + l(u, v) - 2.0 * l(s, u));
  } while (std::next_permutation(idx.begin(), idx.end()));
  return sum / 24.0;
}

}  // namespace

HsicEstimate hsic_naive_ustat(const KernelMatrix& k, const KernelMatrix& l,
                              Index oracle_cap) {
  require_square_pair(k, l, 4, "hsic_naive_ustat");
  const Index m = k.rows();
  if (m > oracle_cap) {
    throw invalid_input("hsic_naive_ustat: sample size above the oracle cap");
  }
  // h is symmetric in its indices, so averaging the distinct 4-subsets
  // equals averaging all ordered 4-tuples.
  double total = 0.0;
  double count = 0.0;
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      for (Index q = j + 1; q < m; ++q) {
        for (Index r = q + 1; r < m; ++r) {
          total += h_tuple(k.values, l.values, {i, j, q, r});
          count += 1.0;
        }
      }
    }
  }
  return HsicEstimate{total / count, m};
}

Vector hsic_h_vector(const KernelMatrix& k_tilde, const KernelMatrix& l_tilde) {
  require_square_pair(k_tilde, l_tilde, 4, "hsic_h_vector");
  require_zero_diagonal(k_tilde, "hsic_h_vector");
  require_zero_diagonal(l_tilde, "hsic_h_vector");
  const Matrix& k = k_tilde.values;
  const Matrix& l = l_tilde.values;
  const double m = static_cast<double>(k.rows());
  const PairSums s = pair_sums(k, l);
  const Vector had_rows = k.cwiseProduct(l).rowwise().sum();  // (K o L) 1
  const Vector k_l1 = k * s.l1;
  const Vector l_k1 = l * s.k1;
  // Conditional triple sums collected from the U-statistic kernel; each
  // closed-form term carries half the coefficient of the grouped expansion
  // because every unordered pair pattern appears twice among the orderings.
  Vector h = 0.5 * ((m - 2.0) * (m - 2.0) * had_rows.array() -
                    m * (s.k1.array() * s.l1.array()) +
                    (m - 2.0) * (s.tr_kl - k_l1.array() - l_k1.array()) +
                    s.s_l * s.k1.array() + s.s_k * s.l1.array() - s.okl)
                       .matrix();
  return h;
}

double hsic_variance_from_h(const Vector& h, double hsic, Index m) {
  const double md = static_cast<double>(m);
  const double f3 = falling_three(m);
  const double r = (h / f3).squaredNorm() / md;
  return 16.0 / md * (r - hsic * hsic);
}

double hsic_covariance_from_h(const Vector& h_a, const Vector& h_b,
                              double hsic_a, double hsic_b, Index m) {
  const double md = static_cast<double>(m);
  const double f3 = falling_three(m);
  const double r = h_a.dot(h_b) / (f3 * f3) / md;
  return 16.0 / md * (r - hsic_a * hsic_b);
}

double hsic_variance(const KernelMatrix& k_tilde, const KernelMatrix& l_tilde) {
  const Vector h = hsic_h_vector(k_tilde, l_tilde);
  const HsicEstimate est = hsic_unbiased(k_tilde, l_tilde);
  return hsic_variance_from_h(h, est.value, est.m);
}

double hsic_cross_covariance(const KernelMatrix& k_tilde,
                             const KernelMatrix& l_tilde,
                             const KernelMatrix& d_tilde) {
  require_square_pair(k_tilde, d_tilde, 4, "hsic_cross_covariance");
  const Vector h_xy = hsic_h_vector(k_tilde, l_tilde);
  const Vector h_xz = hsic_h_vector(k_tilde, d_tilde);
  const double hsic_xy = hsic_unbiased(k_tilde, l_tilde).value;
  const double hsic_xz = hsic_unbiased(k_tilde, d_tilde).value;
  return hsic_covariance_from_h(h_xy, h_xz, hsic_xy, hsic_xz, k_tilde.rows());
}

}  // namespace reltest
