#pragma once

#include "reltest/types.hpp"

#include <cstdint>
#include <random>

namespace reltest {

// Deterministic portable RNG: mt19937_64 stream with normals drawn through
// the inverse CDF, so identical seeds reproduce exactly on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal();  // standard normal via inverse CDF

 private:
  std::mt19937_64 gen_;
};

// Double-precision inverse of the standard normal CDF (rational
// approximation, relative error below 1e-15 on (0, 1)).
double inverse_normal_cdf(double p);

// Trial seed = hash(master_seed, grid_index, trial_index); splitmix64-based
// so distinct (grid, trial) pairs get distinct streams.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t grid_index,
                          std::uint64_t trial_index);

struct Triple {
  DataMatrix x, y, z;
};

// Shared-t construction: t ~ U[0, 2pi), then
//   x = [t, sin t], y = [t cos t, t sin t], z = [t cos t, t sin t],
// each coordinate perturbed by independent N(0,1) noise scaled by its gamma.
struct SineFamilyParams {
  Index m = 300;
  double gamma1 = 0.3;
  double gamma2 = 0.3;
  double gamma3 = 0.7;
  std::uint64_t seed = 0;
};

// Three 2-D Gaussians with identity covariance; the reference mean
// interpolates the candidate means: mu_x = (1-gamma) mu_y + gamma mu_z.
struct GaussianTripleParams {
  Index m = 200;
  Index n = 200;
  Index r = 200;
  Eigen::Vector2d mu_y{-20.0, -20.0};
  Eigen::Vector2d mu_z{20.0, 20.0};
  double gamma = 0.5;
  std::uint64_t seed = 0;
};

Triple gen_sine_family(const SineFamilyParams& params);
Triple gen_gaussian_triple(const GaussianTripleParams& params);

enum class TestKind { hsic_dependent, hsic_independent, mmd };
enum class Family { sine, gaussian_triple };
enum class StatKind { hsic, mmd };

struct HarnessConfig {
  TestKind test = TestKind::hsic_dependent;
  Family family = Family::sine;
  SineFamilyParams sine;
  GaussianTripleParams gaussian;
  int trials = 100;
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
};

struct PowerCurve {
  std::vector<double> grid;
  std::vector<double> rejection_rate;
  std::vector<double> p_median;
  std::vector<double> p_q1;
  std::vector<double> p_q3;
  int trials = 0;
  double alpha = 0.0;
  std::uint64_t master_seed = 0;
};

// Runs the selected test on one seeded draw. The grid value replaces
// gamma3 (sine family) or gamma (Gaussian triple). Kernels follow the
// experiment defaults: per-variable median bandwidth for the HSIC tests,
// averaged median for the MMD test.
TestResult run_trial(const HarnessConfig& cfg, double grid_value,
                     std::uint64_t trial_seed);

// Rejection rate and p-value quartiles over `trials` seeded draws at each
// grid point. Trials fan out across threads; per-trial seeding makes the
// result independent of the execution order.
PowerCurve power_curve(const HarnessConfig& cfg,
                       const std::vector<double>& grid);

// Rejection fraction at the symmetric boundary null (gamma2 == gamma3 for
// the sine family, gamma == 0.5 for the Gaussian triple). Rejects
// configurations that are not symmetric nulls.
double calibrate(const HarnessConfig& cfg);

struct CovarianceCheckConfig {
  StatKind stat = StatKind::mmd;
  Family family = Family::gaussian_triple;
  SineFamilyParams sine;
  GaussianTripleParams gaussian;
  int redraws = 2000;
  std::uint64_t master_seed = 0;
};

// Empirical vs analytical covariance of the statistic pair, entries scaled
// by the reference sample size m.
struct CovarianceCheckReport {
  Eigen::Matrix2d empirical = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d analytical = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d rel_error = Eigen::Matrix2d::Zero();
  int redraws = 0;
  std::vector<std::string> warnings;
};

CovarianceCheckReport monte_carlo_covariance_check(
    const CovarianceCheckConfig& cfg);

}  // namespace reltest
