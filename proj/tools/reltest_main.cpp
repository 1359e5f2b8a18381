// Command-line frontend for the relative dependency (HSIC) and relative
// similarity (MMD) hypothesis tests, plus the simulation harness.

#include "reltest/csv_io.hpp"
#include "reltest/kernels.hpp"
#include "reltest/relative_tests.hpp"
#include "reltest/simulation.hpp"
#include "reltest/types.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;
using namespace reltest;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
  } else {
    std::ofstream out(out_path);
    if (!out) {
      throw invalid_input("cannot open output file: " + out_path);
    }
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
  }
}

double parse_positive_real(const std::string& s, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !(v > 0.0)) {
    throw invalid_input(std::string(what) + ": expected a positive real, got '" +
                        s + "'");
  }
  return v;
}

KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "gaussian") return KernelKind::gaussian;
  if (s == "linear") return KernelKind::linear;
  throw invalid_input("unknown kernel '" + s + "' (expected gaussian|linear)");
}

// Bandwidth flag: "median" resolves per data matrix, "avg-median" uses the
// averaged cross-sample medians (relsim only), a number is used verbatim.
struct BandwidthChoice {
  enum class Mode { median, avg_median, fixed } mode = Mode::median;
  double value = 0.0;
};

BandwidthChoice parse_bandwidth(const std::string& s, bool allow_avg) {
  BandwidthChoice b;
  if (s == "median") {
    b.mode = BandwidthChoice::Mode::median;
  } else if (s == "avg-median") {
    if (!allow_avg) {
      throw invalid_input("bandwidth 'avg-median' is only available for the "
                          "relative similarity test");
    }
    b.mode = BandwidthChoice::Mode::avg_median;
  } else {
    b.mode = BandwidthChoice::Mode::fixed;
    b.value = parse_positive_real(s, "--bandwidth");
  }
  return b;
}

KernelSpec resolve_spec(KernelKind kind, const BandwidthChoice& b,
                        const DataMatrix& x) {
  if (kind == KernelKind::linear) return KernelSpec{kind, 1.0};
  if (b.mode == BandwidthChoice::Mode::fixed) return KernelSpec{kind, b.value};
  return gaussian_median_spec(x);
}

DataMatrix load_csv(const std::string& path, bool has_header) {
  DataMatrix m = read_csv(path, has_header);
  validate_data(m, path);
  return m;
}

void check_row_counts(const DataMatrix& a, const std::string& a_path,
                      const DataMatrix& b, const std::string& b_path) {
  if (a.rows() != b.rows()) {
    throw invalid_input("row count mismatch: " + b_path + " has " +
                        std::to_string(b.rows()) + " rows but " + a_path +
                        " has " + std::to_string(a.rows()));
  }
}

json warnings_json(const std::vector<std::string>& warnings) {
  json arr = json::array();
  for (const std::string& w : warnings) arr.push_back(w);
  return arr;
}

// --- reldep -----------------------------------------------------------

struct ReldepOpts {
  std::string source, target1, target2;
  std::string kernel = "gaussian";
  std::string bandwidth = "median";
  double alpha = 0.05;
  bool independent = false;
  bool has_header = false;
  std::string out;
};

int run_reldep(const ReldepOpts& o) {
  const DataMatrix x = load_csv(o.source, o.has_header);
  const DataMatrix y = load_csv(o.target1, o.has_header);
  const DataMatrix z = load_csv(o.target2, o.has_header);
  check_row_counts(x, o.source, y, o.target1);
  check_row_counts(x, o.source, z, o.target2);

  const KernelKind kind = parse_kernel_kind(o.kernel);
  const BandwidthChoice bw = parse_bandwidth(o.bandwidth, false);
  const KernelSpec kx = resolve_spec(kind, bw, x);
  const KernelSpec ky = resolve_spec(kind, bw, y);
  const KernelSpec kz = resolve_spec(kind, bw, z);

  const TestResult res =
      o.independent ? independent_hsic_test(x, y, z, kx, ky, kz, o.alpha)
                    : relative_hsic_test(x, y, z, kx, ky, kz, o.alpha);

  json j;
  j["schema"] = 1;
  j["test"] = res.test;
  j["m"] = res.m;
  j["hsic_xy"] = res.stat_first;
  j["hsic_xz"] = res.stat_second;
  j["difference"] = res.difference;
  j["var_xy"] = res.var_first;
  j["var_xz"] = res.var_second;
  j["cov_xyxz"] = res.covariance;
  j["var_diff"] = res.var_diff;
  j["z"] = res.z_score;
  j["p_value"] = res.p_value;
  j["alpha"] = res.alpha;
  j["reject"] = res.reject;
  j["kernel"] = res.kernel;
  j["bandwidths"] = {{"source", res.bandwidths[0]},
                     {"target1", res.bandwidths[1]},
                     {"target2", res.bandwidths[2]}};
  j["warnings"] = warnings_json(res.warnings);
  emit(j.dump(2), o.out);
  return 0;
}

// --- relsim -----------------------------------------------------------

struct RelsimOpts {
  std::string ref, cand1, cand2;
  std::string kernel = "gaussian";
  std::string bandwidth = "avg-median";
  double alpha = 0.05;
  bool has_header = false;
  std::string out;
};

int run_relsim(const RelsimOpts& o) {
  const DataMatrix x = load_csv(o.ref, o.has_header);
  const DataMatrix y = load_csv(o.cand1, o.has_header);
  const DataMatrix z = load_csv(o.cand2, o.has_header);
  if (y.cols() != x.cols()) {
    throw invalid_input("column count mismatch: " + o.cand1 + " has " +
                        std::to_string(y.cols()) + " columns but " + o.ref +
                        " has " + std::to_string(x.cols()));
  }
  if (z.cols() != x.cols()) {
    throw invalid_input("column count mismatch: " + o.cand2 + " has " +
                        std::to_string(z.cols()) + " columns but " + o.ref +
                        " has " + std::to_string(x.cols()));
  }

  const KernelKind kind = parse_kernel_kind(o.kernel);
  const BandwidthChoice bw = parse_bandwidth(o.bandwidth, true);
  std::optional<KernelSpec> spec;
  if (kind == KernelKind::linear) {
    spec = KernelSpec{kind, 1.0};
  } else if (bw.mode == BandwidthChoice::Mode::fixed) {
    spec = KernelSpec{kind, bw.value};
  } else if (bw.mode == BandwidthChoice::Mode::median) {
    spec = gaussian_median_spec(x);  // median over the reference sample
  }  // avg-median: leave empty; the test resolves it

  const TestResult res = relative_mmd_test(x, y, z, spec, o.alpha);

  json j;
  j["schema"] = 1;
  j["test"] = res.test;
  j["m"] = res.m;
  j["n"] = res.n;
  j["r"] = res.r;
  j["mmd2_xy"] = res.stat_first;
  j["mmd2_xz"] = res.stat_second;
  j["difference"] = res.difference;
  j["var_xy"] = res.var_first;
  j["var_xz"] = res.var_second;
  j["cov_xyxz"] = res.covariance;
  j["var_diff"] = res.var_diff;
  j["z"] = res.z_score;
  j["p_value"] = res.p_value;
  j["alpha"] = res.alpha;
  j["reject"] = res.reject;
  j["kernel"] = res.kernel;
  j["bandwidths"] = {{"shared", res.bandwidths[0]}};
  j["warnings"] = warnings_json(res.warnings);
  emit(j.dump(2), o.out);
  return 0;
}

// --- reldep-multi -----------------------------------------------------

struct ReldepMultiOpts {
  std::vector<std::string> data;
  std::vector<std::string> weights;
  std::string kernel = "gaussian";
  std::string bandwidth = "median";
  double alpha = 0.05;
  bool has_header = false;
  std::string out;
};

WeightedPair parse_weight(const std::string& s) {
  std::istringstream in(s);
  std::string a, b, w;
  if (!std::getline(in, a, ',') || !std::getline(in, b, ',') ||
      !std::getline(in, w)) {
    throw invalid_input("--weight expects 'i,j,w', got '" + s + "'");
  }
  WeightedPair wp;
  try {
    wp.first = std::stoi(a) - 1;  // 1-based on the command line
    wp.second = std::stoi(b) - 1;
    wp.weight = std::stod(w);
  } catch (const std::exception&) {
    throw invalid_input("--weight expects 'i,j,w', got '" + s + "'");
  }
  if (wp.first < 0 || wp.second < 0) {
    throw invalid_input("--weight indices are 1-based; got '" + s + "'");
  }
  return wp;
}

int run_reldep_multi(const ReldepMultiOpts& o) {
  if (o.data.size() < 2) {
    throw invalid_input("reldep-multi needs at least two --data files");
  }
  std::vector<DataMatrix> datasets;
  datasets.reserve(o.data.size());
  for (const std::string& path : o.data) {
    datasets.push_back(load_csv(path, o.has_header));
    check_row_counts(datasets.front(), o.data.front(), datasets.back(), path);
  }
  std::vector<WeightedPair> weights;
  for (const std::string& w : o.weights) {
    weights.push_back(parse_weight(w));
  }
  for (const WeightedPair& w : weights) {
    if (w.first >= static_cast<int>(datasets.size()) ||
        w.second >= static_cast<int>(datasets.size())) {
      throw invalid_input("--weight references dataset " +
                          std::to_string(std::max(w.first, w.second) + 1) +
                          " but only " + std::to_string(datasets.size()) +
                          " --data files were given");
    }
  }

  const KernelKind kind = parse_kernel_kind(o.kernel);
  const BandwidthChoice bw = parse_bandwidth(o.bandwidth, false);
  std::vector<KernelSpec> specs;
  specs.reserve(datasets.size());
  for (const DataMatrix& d : datasets) {
    specs.push_back(resolve_spec(kind, bw, d));
  }

  const MultiTestResult res =
      generalized_relative_hsic_test(datasets, specs, weights, o.alpha);

  json j;
  j["schema"] = 1;
  j["test"] = "relative-hsic-multi";
  j["m"] = res.m;
  json pairs = json::array();
  for (const auto& p : res.pairs) {
    pairs.push_back({p[0] + 1, p[1] + 1});  // report 1-based
  }
  j["pairs"] = pairs;
  j["weights"] = res.weights;
  j["stats"] = res.stats;
  j["weighted_stat"] = res.weighted_stat;
  j["var_diff"] = res.var_diff;
  j["z"] = res.z_score;
  j["p_value"] = res.p_value;
  j["alpha"] = res.alpha;
  j["reject"] = res.reject;
  j["kernel"] = res.kernel;
  j["bandwidths"] = res.bandwidths;
  j["warnings"] = warnings_json(res.warnings);
  emit(j.dump(2), o.out);
  return 0;
}

// --- power-sim / calibrate --------------------------------------------

struct HarnessOpts {
  std::string test = "dep-hsic";
  std::string family = "sine";
  std::string grid;
  int trials = 100;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  long m = 0, n = 0, r = 0;  // 0 means family default
  double gamma1 = 0.3, gamma2 = 0.3;
  double gamma3 = 0.5;  // calibrate: must equal gamma2
  double gamma = 0.5;
  std::string mu_y = "-20,-20";
  std::string mu_z = "20,20";
  std::string out;
};

TestKind parse_test_kind(const std::string& s) {
  if (s == "dep-hsic") return TestKind::hsic_dependent;
  if (s == "indep-hsic") return TestKind::hsic_independent;
  if (s == "mmd") return TestKind::mmd;
  throw invalid_input("unknown test '" + s +
                      "' (expected dep-hsic|indep-hsic|mmd)");
}

Family parse_family(const std::string& s) {
  if (s == "sine") return Family::sine;
  if (s == "gaussian") return Family::gaussian_triple;
  throw invalid_input("unknown family '" + s + "' (expected sine|gaussian)");
}

Eigen::Vector2d parse_vec2(const std::string& s, const char* what) {
  std::istringstream in(s);
  std::string a, b;
  if (!std::getline(in, a, ',') || !std::getline(in, b)) {
    throw invalid_input(std::string(what) + ": expected 'a,b', got '" + s +
                        "'");
  }
  try {
    return Eigen::Vector2d(std::stod(a), std::stod(b));
  } catch (const std::exception&) {
    throw invalid_input(std::string(what) + ": expected 'a,b', got '" + s +
                        "'");
  }
}

std::vector<double> parse_grid(const std::string& s) {
  if (s.empty()) {
    throw invalid_input("--grid is required");
  }
  std::vector<double> grid;
  if (s.find(':') != std::string::npos) {
    // start:stop:count
    std::istringstream in(s);
    std::string a, b, c;
    if (!std::getline(in, a, ':') || !std::getline(in, b, ':') ||
        !std::getline(in, c)) {
      throw invalid_input("--grid expects 'start:stop:count' or a comma list");
    }
    double start = 0.0, stop = 0.0;
    long count = 0;
    try {
      start = std::stod(a);
      stop = std::stod(b);
      count = std::stol(c);
    } catch (const std::exception&) {
      throw invalid_input("--grid expects 'start:stop:count' or a comma list");
    }
    if (count < 1) {
      throw invalid_input("--grid: count must be >= 1");
    }
    if (count == 1) {
      grid.push_back(start);
    } else {
      for (long i = 0; i < count; ++i) {
        grid.push_back(start + (stop - start) * static_cast<double>(i) /
                                   static_cast<double>(count - 1));
      }
    }
  } else {
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      try {
        grid.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw invalid_input("--grid: cannot parse value '" + tok + "'");
      }
    }
    if (grid.empty()) {
      throw invalid_input("--grid: empty grid");
    }
  }
  return grid;
}

HarnessConfig make_config(const HarnessOpts& o) {
  HarnessConfig cfg;
  cfg.test = parse_test_kind(o.test);
  cfg.family = parse_family(o.family);
  cfg.trials = o.trials;
  cfg.alpha = o.alpha;
  cfg.master_seed = o.seed;
  if (cfg.family == Family::sine) {
    if (o.m > 0) cfg.sine.m = o.m;
    cfg.sine.gamma1 = o.gamma1;
    cfg.sine.gamma2 = o.gamma2;
    cfg.sine.gamma3 = o.gamma3;
  } else {
    if (o.m > 0) cfg.gaussian.m = o.m;
    cfg.gaussian.n = o.n > 0 ? o.n : cfg.gaussian.m;
    cfg.gaussian.r = o.r > 0 ? o.r : cfg.gaussian.m;
    cfg.gaussian.mu_y = parse_vec2(o.mu_y, "--mu-y");
    cfg.gaussian.mu_z = parse_vec2(o.mu_z, "--mu-z");
    cfg.gaussian.gamma = o.gamma;
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw invalid_input("alpha must lie in (0, 1)");
  }
  return cfg;
}

std::string table_header() {
  return "grid_value,rejection_rate,p_median,p_q1,p_q3,trials,alpha,seed\n";
}

std::string table_rows(const PowerCurve& pc) {
  std::string out;
  for (std::size_t i = 0; i < pc.grid.size(); ++i) {
    out += format_double(pc.grid[i]) + "," +
           format_double(pc.rejection_rate[i]) + "," +
           format_double(pc.p_median[i]) + "," + format_double(pc.p_q1[i]) +
           "," + format_double(pc.p_q3[i]) + "," + std::to_string(pc.trials) +
           "," + format_double(pc.alpha) + "," +
           std::to_string(pc.master_seed) + "\n";
  }
  return out;
}

int run_power_sim(const HarnessOpts& o) {
  if (o.trials < 1) {
    throw invalid_input("--trials must be >= 1");
  }
  const HarnessConfig cfg = make_config(o);
  const std::vector<double> grid = parse_grid(o.grid);
  const PowerCurve pc = power_curve(cfg, grid);
  emit(table_header() + table_rows(pc), o.out);
  return 0;
}

int run_calibrate(const HarnessOpts& o) {
  if (o.trials < 1) {
    throw invalid_input("--trials must be >= 1");
  }
  const HarnessConfig cfg = make_config(o);
  double null_value = 0.0;
  if (cfg.family == Family::sine) {
    if (cfg.sine.gamma2 != cfg.sine.gamma3) {
      throw invalid_input("calibrate: the sine-family null requires "
                          "--gamma2 == --gamma3");
    }
    null_value = cfg.sine.gamma3;
  } else {
    if (cfg.gaussian.gamma != 0.5) {
      throw invalid_input(
          "calibrate: the Gaussian-triple null requires --gamma 0.5");
    }
    null_value = cfg.gaussian.gamma;
  }
  const PowerCurve pc = power_curve(cfg, {null_value});
  emit(table_header() + table_rows(pc), o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Relative dependency (HSIC) and relative similarity (MMD) "
      "non-parametric hypothesis tests"};
  app.require_subcommand(1);

  ReldepOpts reldep;
  CLI::App* dep = app.add_subcommand(
      "reldep",
      "Test whether the source is more dependent on target1 than on target2");
  dep->add_option("--source", reldep.source, "CSV with the source sample")
      ->required();
  dep->add_option("--target1", reldep.target1, "CSV with the first target")
      ->required();
  dep->add_option("--target2", reldep.target2, "CSV with the second target")
      ->required();
  dep->add_option("--kernel", reldep.kernel, "gaussian|linear");
  dep->add_option("--bandwidth", reldep.bandwidth,
                  "median | positive real (Gaussian bandwidth)");
  dep->add_option("--alpha", reldep.alpha, "significance level");
  dep->add_flag("--independent", reldep.independent,
                "use the split-sample baseline instead of the joint test");
  dep->add_flag("--has-header", reldep.has_header, "skip one header row");
  dep->add_option("--out", reldep.out, "write the JSON report here");

  RelsimOpts relsim;
  CLI::App* sim = app.add_subcommand(
      "relsim",
      "Test which of two candidate samples is closer to a reference sample");
  sim->add_option("--ref", relsim.ref, "CSV with the reference sample")
      ->required();
  sim->add_option("--cand1", relsim.cand1, "CSV with the first candidate")
      ->required();
  sim->add_option("--cand2", relsim.cand2, "CSV with the second candidate")
      ->required();
  sim->add_option("--kernel", relsim.kernel, "gaussian|linear");
  sim->add_option("--bandwidth", relsim.bandwidth,
                  "avg-median | median | positive real");
  sim->add_option("--alpha", relsim.alpha, "significance level");
  sim->add_flag("--has-header", relsim.has_header, "skip one header row");
  sim->add_option("--out", relsim.out, "write the JSON report here");

  ReldepMultiOpts multi;
  CLI::App* mul = app.add_subcommand(
      "reldep-multi", "Weighted-sum generalization over several datasets");
  mul->add_option("--data", multi.data, "CSV file (repeat, >= 2)")
      ->required();
  mul->add_option("--weight", multi.weights,
                  "'i,j,w': weight w on HSIC(dataset i, dataset j), 1-based "
                  "(repeat)")
      ->required();
  mul->add_option("--kernel", multi.kernel, "gaussian|linear");
  mul->add_option("--bandwidth", multi.bandwidth,
                  "median | positive real (Gaussian bandwidth)");
  mul->add_option("--alpha", multi.alpha, "significance level");
  mul->add_flag("--has-header", multi.has_header, "skip one header row");
  mul->add_option("--out", multi.out, "write the JSON report here");

  HarnessOpts power;
  CLI::App* pow_cmd = app.add_subcommand(
      "power-sim", "Rejection-rate sweep over a parameter grid");
  pow_cmd->add_option("--test", power.test, "dep-hsic|indep-hsic|mmd");
  pow_cmd->add_option("--family", power.family, "sine|gaussian");
  pow_cmd->add_option("--grid", power.grid,
                      "comma list or start:stop:count; varies gamma3 (sine) "
                      "or gamma (gaussian)")
      ->required();
  pow_cmd->add_option("--trials", power.trials, "trials per grid point");
  pow_cmd->add_option("--alpha", power.alpha, "significance level");
  pow_cmd->add_option("--seed", power.seed, "master seed");
  pow_cmd->add_option("--m", power.m, "sample size (family default if unset)");
  pow_cmd->add_option("--n", power.n, "first candidate size (gaussian)");
  pow_cmd->add_option("--r", power.r, "second candidate size (gaussian)");
  pow_cmd->add_option("--gamma1", power.gamma1, "sine family noise scale");
  pow_cmd->add_option("--gamma2", power.gamma2, "sine family noise scale");
  pow_cmd->add_option("--mu-y", power.mu_y, "gaussian mean 'a,b'");
  pow_cmd->add_option("--mu-z", power.mu_z, "gaussian mean 'a,b'");
  pow_cmd->add_option("--out", power.out, "write the CSV table here");

  HarnessOpts cal;
  cal.trials = 500;
  cal.gamma2 = 0.5;
  cal.gamma3 = 0.5;
  CLI::App* cal_cmd = app.add_subcommand(
      "calibrate", "Rejection rate at a symmetric boundary null");
  cal_cmd->add_option("--test", cal.test, "dep-hsic|indep-hsic|mmd");
  cal_cmd->add_option("--family", cal.family, "sine|gaussian");
  cal_cmd->add_option("--trials", cal.trials, "number of trials");
  cal_cmd->add_option("--alpha", cal.alpha, "significance level");
  cal_cmd->add_option("--seed", cal.seed, "master seed");
  cal_cmd->add_option("--m", cal.m, "sample size (family default if unset)");
  cal_cmd->add_option("--n", cal.n, "first candidate size (gaussian)");
  cal_cmd->add_option("--r", cal.r, "second candidate size (gaussian)");
  cal_cmd->add_option("--gamma1", cal.gamma1, "sine family noise scale");
  cal_cmd->add_option("--gamma2", cal.gamma2, "sine family noise scale");
  cal_cmd->add_option("--gamma3", cal.gamma3,
                      "sine family noise scale (must equal --gamma2)");
  cal_cmd->add_option("--gamma", cal.gamma,
                      "gaussian interpolation (must be 0.5)");
  cal_cmd->add_option("--mu-y", cal.mu_y, "gaussian mean 'a,b'");
  cal_cmd->add_option("--mu-z", cal.mu_z, "gaussian mean 'a,b'");
  cal_cmd->add_option("--out", cal.out, "write the CSV table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(dep)) return run_reldep(reldep);
    if (app.got_subcommand(sim)) return run_relsim(relsim);
    if (app.got_subcommand(mul)) return run_reldep_multi(multi);
    if (app.got_subcommand(pow_cmd)) return run_power_sim(power);
    if (app.got_subcommand(cal_cmd)) return run_calibrate(cal);
  } catch (const invalid_input& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
