#include "reltest/simulation.hpp"

#include "reltest/hsic.hpp"
#include "reltest/kernels.hpp"
#include "reltest/parallel.hpp"
#include "reltest/relative_tests.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace reltest {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t grid_index,
                          std::uint64_t trial_index) {
  std::uint64_t state = master_seed;
  std::uint64_t out = splitmix64(state);
  state ^= splitmix64(state) + grid_index;
  out ^= splitmix64(state);
  state ^= splitmix64(state) + trial_index;
  out ^= splitmix64(state);
  return out;
}

// Wichura's rational approximation to the normal quantile (double
// precision, three regions).
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw invalid_input("inverse_normal_cdf: p must lie in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) *
                 r +
             4.5921953931549871457e+4) *
                r +
            1.3731693765509461125e+4) *
               r +
           1.9715909503065514427e+3) *
              r +
          1.3314166789178437745e+2) *
             r +
         3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) *
                 r +
             2.1213794301586595867e+4) *
                r +
            5.3941960214247511077e+3) *
               r +
           6.8718700749205790830e+2) *
              r +
          4.2313330701600911252e+1) *
             r +
         1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e+0) *
                r +
            3.64784832476320460504e+0) *
               r +
           5.76949722146069140550e+0) *
              r +
          4.63033784615654529590e+0) *
             r +
         1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e+0) *
              r +
          2.05319162663775882187e+0) *
             r +
         1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e+0) *
              r +
          5.46378491116411436990e+0) *
             r +
         6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                  r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

double Rng::normal() {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return inverse_normal_cdf(u);
}

Triple gen_sine_family(const SineFamilyParams& p) {
  if (p.m < 8) {
    throw invalid_input("gen_sine_family: need m >= 8");
  }
  for (double g : {p.gamma1, p.gamma2, p.gamma3}) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw invalid_input("gen_sine_family: noise scales must be finite and "
                          "nonnegative");
    }
  }
  Rng rng(p.seed);
  Triple out;
  out.x.resize(p.m, 2);
  out.y.resize(p.m, 2);
  out.z.resize(p.m, 2);
  constexpr double two_pi = 2.0 * M_PI;
  for (Index i = 0; i < p.m; ++i) {
    const double t = two_pi * rng.uniform();
    out.x(i, 0) = t + p.gamma1 * rng.normal();
    out.x(i, 1) = std::sin(t) + p.gamma1 * rng.normal();
    out.y(i, 0) = t * std::cos(t) + p.gamma2 * rng.normal();
    out.y(i, 1) = t * std::sin(t) + p.gamma2 * rng.normal();
    out.z(i, 0) = t * std::cos(t) + p.gamma3 * rng.normal();
    out.z(i, 1) = t * std::sin(t) + p.gamma3 * rng.normal();
  }
  return out;
}

Triple gen_gaussian_triple(const GaussianTripleParams& p) {
  if (p.m < 2 || p.n < 2 || p.r < 2) {
    throw invalid_input("gen_gaussian_triple: sample sizes must be >= 2");
  }
  if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) {
    throw invalid_input("gen_gaussian_triple: gamma must lie in [0, 1]");
  }
  const Eigen::Vector2d mu_x = (1.0 - p.gamma) * p.mu_y + p.gamma * p.mu_z;
  Rng rng(p.seed);
  Triple out;
  out.x.resize(p.m, 2);
  out.y.resize(p.n, 2);
  out.z.resize(p.r, 2);
  for (Index i = 0; i < p.m; ++i) {
    out.x(i, 0) = mu_x[0] + rng.normal();
    out.x(i, 1) = mu_x[1] + rng.normal();
  }
  for (Index i = 0; i < p.n; ++i) {
    out.y(i, 0) = p.mu_y[0] + rng.normal();
    out.y(i, 1) = p.mu_y[1] + rng.normal();
  }
  for (Index i = 0; i < p.r; ++i) {
    out.z(i, 0) = p.mu_z[0] + rng.normal();
    out.z(i, 1) = p.mu_z[1] + rng.normal();
  }
  return out;
}

namespace {

Triple generate(const HarnessConfig& cfg, double grid_value,
                std::uint64_t seed) {
  if (cfg.family == Family::sine) {
    SineFamilyParams p = cfg.sine;
    p.gamma3 = grid_value;
    p.seed = seed;
    return gen_sine_family(p);
  }
  GaussianTripleParams p = cfg.gaussian;
  p.gamma = grid_value;
  p.seed = seed;
  return gen_gaussian_triple(p);
}

}  // namespace

TestResult run_trial(const HarnessConfig& cfg, double grid_value,
                     std::uint64_t trial_seed) {
  const Triple t = generate(cfg, grid_value, trial_seed);
  switch (cfg.test) {
    case TestKind::hsic_dependent: {
      return relative_hsic_test(t.x, t.y, t.z, gaussian_median_spec(t.x),
                                gaussian_median_spec(t.y),
                                gaussian_median_spec(t.z), cfg.alpha);
    }
    case TestKind::hsic_independent: {
      return independent_hsic_test(t.x, t.y, t.z, gaussian_median_spec(t.x),
                                   gaussian_median_spec(t.y),
                                   gaussian_median_spec(t.z), cfg.alpha);
    }
    case TestKind::mmd:
      return relative_mmd_test(t.x, t.y, t.z, std::nullopt, cfg.alpha);
  }
  throw invalid_input("run_trial: unknown test selector");
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  const std::size_t n = v.size();
  if (n == 1) return v[0];
  const double pos = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

double median_sorted(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

PowerCurve power_curve(const HarnessConfig& cfg,
                       const std::vector<double>& grid) {
  if (grid.empty()) {
    throw invalid_input("power_curve: empty grid");
  }
  if (cfg.trials < 1) {
    throw invalid_input("power_curve: trials must be >= 1");
  }
  const std::size_t points = grid.size();
  const std::size_t total = points * static_cast<std::size_t>(cfg.trials);
  std::vector<double> p_values(total, 0.0);
  std::vector<std::uint8_t> rejected(total, 0);
  std::string first_error;
  bool failed = false;

#pragma omp parallel for schedule(dynamic) num_threads(harness_threads())
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(total);
       ++idx) {
    const std::size_t g = static_cast<std::size_t>(idx) /
                          static_cast<std::size_t>(cfg.trials);
    const std::size_t t = static_cast<std::size_t>(idx) %
                          static_cast<std::size_t>(cfg.trials);
    try {
      const TestResult res =
          run_trial(cfg, grid[g], derive_seed(cfg.master_seed, g, t));
      p_values[idx] = res.p_value;
      rejected[idx] = res.reject ? 1 : 0;
    } catch (const std::exception& e) {
#pragma omp critical
      {
        if (!failed) {
          failed = true;
          first_error = "grid point " + std::to_string(grid[g]) + ", trial " +
                        std::to_string(t) + ": " + e.what();
        }
      }
    }
  }
  if (failed) {
    throw numeric_error("power_curve: " + first_error);
  }

  PowerCurve out;
  out.grid = grid;
  out.trials = cfg.trials;
  out.alpha = cfg.alpha;
  out.master_seed = cfg.master_seed;
  for (std::size_t g = 0; g < points; ++g) {
    std::vector<double> ps(
        p_values.begin() + static_cast<std::ptrdiff_t>(g * cfg.trials),
        p_values.begin() + static_cast<std::ptrdiff_t>((g + 1) * cfg.trials));
    std::sort(ps.begin(), ps.end());
    double rate = 0.0;
    for (std::size_t t = 0; t < static_cast<std::size_t>(cfg.trials); ++t) {
      rate += rejected[g * cfg.trials + t];
    }
    out.rejection_rate.push_back(rate / cfg.trials);
    out.p_median.push_back(median_sorted(ps));
    out.p_q1.push_back(quantile_sorted(ps, 0.25));
    out.p_q3.push_back(quantile_sorted(ps, 0.75));
  }
  return out;
}

double calibrate(const HarnessConfig& cfg) {
  if (cfg.trials < 1) {
    throw invalid_input("calibrate: trials must be >= 1");
  }
  double null_value = 0.0;
  if (cfg.family == Family::sine) {
    if (cfg.sine.gamma2 != cfg.sine.gamma3) {
      throw invalid_input(
          "calibrate: the sine-family null requires gamma2 == gamma3");
    }
    null_value = cfg.sine.gamma3;
  } else {
    if (cfg.gaussian.gamma != 0.5) {
      throw invalid_input(
          "calibrate: the Gaussian-triple null requires gamma == 0.5");
    }
    null_value = cfg.gaussian.gamma;
  }
  const PowerCurve pc = power_curve(cfg, {null_value});
  return pc.rejection_rate.front();
}

namespace {

constexpr std::uint64_t kKernelCalibrationTag = 0xC0FFEEULL;

struct PairSample {
  double stat1 = 0.0, stat2 = 0.0;
  double var1 = 0.0, var2 = 0.0, cov = 0.0;
};

PairSample hsic_pair_sample(const Triple& t,
                            const std::array<KernelSpec, 3>& specs) {
  const KernelMatrix kt = zero_diagonal(kernel_matrix(specs[0], t.x, t.x));
  const KernelMatrix lt = zero_diagonal(kernel_matrix(specs[1], t.y, t.y));
  const KernelMatrix dt = zero_diagonal(kernel_matrix(specs[2], t.z, t.z));
  PairSample s;
  s.stat1 = hsic_unbiased(kt, lt).value;
  s.stat2 = hsic_unbiased(kt, dt).value;
  const Vector h1 = hsic_h_vector(kt, lt);
  const Vector h2 = hsic_h_vector(kt, dt);
  const Index m = t.x.rows();
  s.var1 = hsic_variance_from_h(h1, s.stat1, m);
  s.var2 = hsic_variance_from_h(h2, s.stat2, m);
  s.cov = hsic_covariance_from_h(h1, h2, s.stat1, s.stat2, m);
  return s;
}

PairSample mmd_pair_sample(const Triple& t, const KernelSpec& spec) {
  const TestResult res = relative_mmd_test(t.x, t.y, t.z, spec, 0.05);
  PairSample s;
  s.stat1 = res.stat_first;
  s.stat2 = res.stat_second;
  s.var1 = res.var_first;
  s.var2 = res.var_second;
  s.cov = res.covariance;
  return s;
}

}  // namespace

CovarianceCheckReport monte_carlo_covariance_check(
    const CovarianceCheckConfig& cfg) {
  if (cfg.redraws < 100) {
    throw invalid_input("monte_carlo_covariance_check: need >= 100 redraws");
  }
  HarnessConfig gen_cfg;
  gen_cfg.family = cfg.family;
  gen_cfg.sine = cfg.sine;
  gen_cfg.gaussian = cfg.gaussian;
  const double grid_value = cfg.family == Family::sine ? cfg.sine.gamma3
                                                       : cfg.gaussian.gamma;

  // One calibration draw fixes the kernel so that the redraws estimate the
  // covariance of the statistics themselves, not bandwidth jitter.
  const Triple cal = generate(
      gen_cfg, grid_value,
      derive_seed(cfg.master_seed, kKernelCalibrationTag, 0));
  std::array<KernelSpec, 3> hsic_specs{gaussian_median_spec(cal.x),
                                       gaussian_median_spec(cal.y),
                                       gaussian_median_spec(cal.z)};
  const KernelSpec mmd_spec{
      KernelKind::gaussian, averaged_median_heuristic(cal.x, cal.y, cal.z)};

  std::vector<PairSample> samples(static_cast<std::size_t>(cfg.redraws));
  std::string first_error;
  bool failed = false;
#pragma omp parallel for schedule(dynamic) num_threads(harness_threads())
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cfg.redraws);
       ++i) {
    try {
      const Triple t = generate(
          gen_cfg, grid_value,
          derive_seed(cfg.master_seed, 0, static_cast<std::uint64_t>(i)));
      samples[i] = cfg.stat == StatKind::hsic ? hsic_pair_sample(t, hsic_specs)
                                              : mmd_pair_sample(t, mmd_spec);
    } catch (const std::exception& e) {
#pragma omp critical
      {
        if (!failed) {
          failed = true;
          first_error = e.what();
        }
      }
    }
  }
  if (failed) {
    throw numeric_error("monte_carlo_covariance_check: " + first_error);
  }

  const double n = static_cast<double>(cfg.redraws);
  double m1 = 0.0, m2 = 0.0;
  for (const PairSample& s : samples) {
    m1 += s.stat1;
    m2 += s.stat2;
  }
  m1 /= n;
  m2 /= n;
  double v11 = 0.0, v22 = 0.0, v12 = 0.0;
  double a11 = 0.0, a22 = 0.0, a12 = 0.0;
  for (const PairSample& s : samples) {
    v11 += (s.stat1 - m1) * (s.stat1 - m1);
    v22 += (s.stat2 - m2) * (s.stat2 - m2);
    v12 += (s.stat1 - m1) * (s.stat2 - m2);
    a11 += s.var1;
    a22 += s.var2;
    a12 += s.cov;
  }
  v11 /= n - 1.0;
  v22 /= n - 1.0;
  v12 /= n - 1.0;
  a11 /= n;
  a22 /= n;
  a12 /= n;

  const double scale = static_cast<double>(
      cfg.family == Family::sine ? cfg.sine.m : cfg.gaussian.m);
  CovarianceCheckReport rep;
  rep.redraws = cfg.redraws;
  rep.empirical << v11, v12, v12, v22;
  rep.analytical << a11, a12, a12, a22;
  rep.empirical *= scale;
  rep.analytical *= scale;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      rep.rel_error(i, j) = std::abs(rep.analytical(i, j) - rep.empirical(i, j)) /
                            std::abs(rep.empirical(i, j));
    }
  }
  if (cfg.redraws < 500) {
    rep.warnings.push_back(
        "fewer than 500 redraws: empirical moments carry wide uncertainty");
  }
  return rep;
}

}  // namespace reltest
