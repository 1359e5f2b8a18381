#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace reltest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Rows are observations, columns are features.
using DataMatrix = Matrix;

// Malformed or inconsistent input (shape mismatch, bad flags, bad files).
// The CLI maps this to exit code 2.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numeric breakdown inside an otherwise well-formed computation
// (degenerate data, non-finite intermediate). The CLI maps this to exit code 1.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KernelKind { gaussian, linear };

struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  double bandwidth = 1.0;  // Gaussian only; must be > 0
};

// A realized Gram matrix. `zero_diagonal` marks the "tilde" variant used by
// the unbiased estimators.
struct KernelMatrix {
  Matrix values;
  bool zero_diagonal = false;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

// Unbiased HSIC estimate; may be negative.
struct HsicEstimate {
  double value = 0.0;
  Index m = 0;
};

// Unbiased MMD^2 estimate; may be negative.
struct MmdEstimate {
  double value = 0.0;
  Index m = 0;
  Index n = 0;
};

// Variance of each statistic at its sample size, their covariance, and the
// implied variance of the difference. All entries live on the same scale:
// the variance of the un-normalized statistic at the given sample size.
struct CovarianceSummary {
  double var_xy = 0.0;
  double var_xz = 0.0;
  double cov_xyxz = 0.0;
  double var_diff = 0.0;
};

struct TestResult {
  std::string test;
  double stat_first = 0.0;
  double stat_second = 0.0;
  double difference = 0.0;
  double var_first = 0.0;
  double var_second = 0.0;
  double covariance = 0.0;
  double var_diff = 0.0;
  double z_score = 0.0;
  double p_value = 0.0;
  double alpha = 0.0;
  bool reject = false;
  Index m = 0;
  Index n = 0;
  Index r = 0;
  std::string kernel;
  std::vector<double> bandwidths;
  std::vector<std::string> warnings;
};

// One weighted HSIC statistic in the generalized test. Dataset indices are
// zero-based; the pair (first, second) need not be ordered.
struct WeightedPair {
  int first = 0;
  int second = 0;
  double weight = 0.0;
};

struct MultiTestResult {
  std::vector<std::array<int, 2>> pairs;  // canonicalized, first < second
  std::vector<double> weights;
  std::vector<double> stats;
  Matrix covariance;  // full covariance estimate after any eigenvalue clipping
  double weighted_stat = 0.0;
  double var_diff = 0.0;
  double z_score = 0.0;
  double p_value = 0.0;
  double alpha = 0.0;
  bool reject = false;
  Index m = 0;
  std::string kernel;
  std::vector<double> bandwidths;
  std::vector<std::string> warnings;
};

void validate_data(const DataMatrix& x, const std::string& name);
void validate_kernel_spec(const KernelSpec& spec);
std::string kernel_name(KernelKind kind);

}  // namespace reltest
