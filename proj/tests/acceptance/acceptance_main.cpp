// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavier end-to-end statistical checks live here rather than in
// the unit suites.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bas/baselines.hpp"
#include "bas/data.hpp"
#include "bas/metrics.hpp"
#include "bas/model.hpp"
#include "bas/rng.hpp"
#include "bas/sampler.hpp"
#include "bas/stiefel.hpp"
#include "bas/surrogate.hpp"

namespace fs = std::filesystem;
using namespace bas;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Context {
  std::string cli_path;
  fs::path workdir;
};

class Runner {
 public:
  void add(const std::string& name, std::function<std::string()> body) {
    criteria_.push_back({name, std::move(body)});
  }

  int run_all() {
    int failures = 0;
    for (size_t i = 0; i < criteria_.size(); ++i) {
      auto start = std::chrono::steady_clock::now();
      std::string detail;
      bool crashed = false;
      try {
        detail = criteria_[i].body();  // empty string = pass
      } catch (const std::exception& e) {
        crashed = true;
        detail = std::string("exception: ") + e.what();
      }
      double secs = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
      bool pass = detail.empty() && !crashed;
      std::printf("[%s] %zu. %s (%.1f s)%s%s\n", pass ? "PASS" : "FAIL", i + 1,
                  criteria_[i].name.c_str(), secs, pass ? "" : " -- ",
                  pass ? "" : detail.c_str());
      std::fflush(stdout);
      if (!pass) ++failures;
    }
    return failures;
  }

 private:
  struct Criterion {
    std::string name;
    std::function<std::string()> body;
  };
  std::vector<Criterion> criteria_;
};

std::string check(bool ok, const std::string& message) {
  return ok ? std::string() : message;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// ---- criterion bodies -------------------------------------------------------

std::string orthonormality_suite() {
  auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    int d = 1 + static_cast<int>(rng.integer(100));
    int m = 1 + static_cast<int>(rng.integer(std::min(d, 5)));
    ProjectionParams p(rng.normal_vector(projection_param_count(d, m)), d, m);
    Eigen::MatrixXd W = householder_map(p);
    double err = (W.transpose() * W - Eigen::MatrixXd::Identity(m, m))
                     .cwiseAbs()
                     .maxCoeff();
    worst = std::max(worst, err);
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (worst > 1e-10) return "max |W^T W - I| = " + fmt(worst) + " > 1e-10";
  if (secs >= 10.0) return "runtime " + fmt(secs) + " s >= 10 s";
  return {};
}

std::string haar_prior_check() {
  HaarCheckReport report = haar_uniformity_check(10000, 10, 1, 77);
  double v = report.first_col_sq_mean[0];
  return check(v >= 0.08 && v <= 0.12,
               "mean W11^2 = " + fmt(v) + " outside [0.08, 0.12]");
}

std::string gradient_contract() {
  auto start = std::chrono::steady_clock::now();
  Rng rng(31415);
  const int n = 30;
  double worst = 0.0;
  for (auto [d, m] : {std::pair{5, 1}, std::pair{8, 2}}) {
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) X(i, j) = rng.normal();
    Eigen::VectorXd y = rng.normal_vector(n);
    const int k = projection_param_count(d, m);
    for (int point = 0; point < 20; ++point) {
      Eigen::VectorXd v(k + m + 2);
      for (int j = 0; j < k; ++j) v[j] = rng.normal();
      for (int j = 0; j < m + 2; ++j) v[k + j] = 0.5 * rng.normal();
      BASParams p = BASParams::unpack(v, d, m);
      Eigen::VectorXd analytic = log_posterior_gradient(p, X, y);

      const double step = 1e-5;
      Eigen::VectorXd probe = v;
      for (int j = 0; j < v.size(); ++j) {
        probe[j] = v[j] + step;
        double hi = log_posterior(BASParams::unpack(probe, d, m), X, y);
        probe[j] = v[j] - step;
        double lo = log_posterior(BASParams::unpack(probe, d, m), X, y);
        probe[j] = v[j];
        double fd = (hi - lo) / (2.0 * step);
        double scale =
            std::max({std::abs(analytic[j]), std::abs(fd), 1e-4});
        worst = std::max(worst, std::abs(analytic[j] - fd) / scale);
      }
    }
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (worst > 1e-5) return "max relative error " + fmt(worst) + " > 1e-5";
  if (secs >= 60.0) return "runtime " + fmt(secs) + " s >= 60 s";
  return {};
}

std::string sampler_calibration() {
  SamplerConfig cfg;
  cfg.chains = 4;
  cfg.draws = 1000;
  cfg.warmup = 500;
  cfg.seed = 8675309;
  LogDensityFn logp = [](const Eigen::VectorXd& q) {
    return -0.5 * q.squaredNorm();
  };
  GradientFn grad = [](const Eigen::VectorXd& q) { return (-q).eval(); };
  SampleResult res = nuts_sample(logp, grad, 1, cfg);

  Eigen::VectorXd pooled(cfg.chains * cfg.draws);
  for (int c = 0; c < cfg.chains; ++c) {
    pooled.segment(c * cfg.draws, cfg.draws) = res.chains[c].col(0);
  }
  double mean = pooled.mean();
  double var = (pooled.array() - mean).square().sum() / (pooled.size() - 1);
  double rhat = res.diagnostics.split_rhat[0];
  if (!(mean >= -0.1 && mean <= 0.1))
    return "pooled mean " + fmt(mean) + " outside [-0.1, 0.1]";
  if (!(var >= 0.85 && var <= 1.15))
    return "pooled variance " + fmt(var) + " outside [0.85, 1.15]";
  if (!(rhat <= 1.05)) return "split-Rhat " + fmt(rhat) + " > 1.05";
  return {};
}

TrainConfig scaled_config(Method method, int m, int n_train,
                          std::uint64_t seed) {
  TrainConfig cfg;
  cfg.method = method;
  cfg.m = m;
  cfg.n_train = n_train;
  cfg.seed = seed;
  cfg.sampler.chains = 4;
  cfg.sampler.draws = 500;
  cfg.sampler.warmup = 500;
  cfg.moas_restarts = 60;
  cfg.moas_max_iterations = 500;
  cfg.bgp_n_grad = 1000;
  cfg.bgp_thin_draws = 100;
  cfg.draws_per_sample = 10;
  return cfg;
}

std::string desk_scale_as_recovery() {
  auto start = std::chrono::steady_clock::now();
  const double limit = 15.0 * M_PI / 180.0;
  std::vector<double> bas_mfsa, bgp_mfsa;
  for (std::uint64_t seed : {0, 1, 2}) {
    auto [ds, spec] = generate_quadratic(10, 1, 300, 1000 + seed, 0.05);
    Surrogate bas_model =
        train_surrogate(ds, scaled_config(Method::Bas, 1, 50, seed));
    Surrogate bgp_model =
        train_surrogate(ds, scaled_config(Method::Bgp, 1, 50, seed));
    bas_mfsa.push_back(*evaluate_surrogate(bas_model, ds).mfsa_rad);
    bgp_mfsa.push_back(*evaluate_surrogate(bgp_model, ds).mfsa_rad);
  }
  int recovered = 0;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    detail += " seed" + std::to_string(i) + ": bas=" + fmt(bas_mfsa[i]) +
              " bgp=" + fmt(bgp_mfsa[i]);
    if (bas_mfsa[i] <= limit) ++recovered;
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (recovered < 2)
    return "BAS MFSA <= 15 deg on only " + std::to_string(recovered) +
           " of 3 seeds;" + detail;
  for (int i = 0; i < 3; ++i) {
    if (bas_mfsa[i] <= limit && !(bgp_mfsa[i] > bas_mfsa[i]))
      return "B-GP MFSA not larger than BAS on seed " + std::to_string(i) +
             ";" + detail;
  }
  if (secs >= 900.0) return "runtime " + fmt(secs) + " s >= 900 s";
  return {};
}

struct SparseCells {
  std::vector<double> bas_r2, moas_r2, bgp_r2;
  std::vector<double> bas_mlppd, moas_mlppd;
};

const SparseCells& sparse_data_cells() {
  static SparseCells cells = [] {
    SparseCells out;
    for (std::uint64_t seed : {0, 1, 2}) {
      auto [ds, spec] = generate_quadratic(25, 1, 150, 2000 + seed, 0.05);
      Surrogate bas_model =
          train_surrogate(ds, scaled_config(Method::Bas, 1, 25, seed));
      Surrogate moas_model =
          train_surrogate(ds, scaled_config(Method::Moas, 1, 25, seed));
      Surrogate bgp_model =
          train_surrogate(ds, scaled_config(Method::Bgp, 1, 25, seed));
      MetricsReport bas_report = evaluate_surrogate(bas_model, ds);
      MetricsReport moas_report = evaluate_surrogate(moas_model, ds);
      MetricsReport bgp_report = evaluate_surrogate(bgp_model, ds);
      out.bas_r2.push_back(bas_report.r_squared);
      out.moas_r2.push_back(moas_report.r_squared);
      out.bgp_r2.push_back(bgp_report.r_squared);
      out.bas_mlppd.push_back(bas_report.mlppd);
      out.moas_mlppd.push_back(moas_report.mlppd);
    }
    return out;
  }();
  return cells;
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[1];
}

std::string deterministic_accuracy_ordering() {
  const SparseCells& cells = sparse_data_cells();
  double bas = median3(cells.bas_r2);
  double moas = median3(cells.moas_r2);
  double bgp = median3(cells.bgp_r2);
  std::string detail = " medians: bas=" + fmt(bas) + " moas=" + fmt(moas) +
                       " bgp=" + fmt(bgp);
  if (!(bas >= moas)) return "median BAS R^2 below MO-AS;" + detail;
  if (!(bas >= bgp)) return "median BAS R^2 below B-GP;" + detail;
  return {};
}

std::string probabilistic_accuracy_ordering() {
  const SparseCells& cells = sparse_data_cells();
  for (int i = 0; i < 3; ++i) {
    if (!(cells.bas_mlppd[i] > cells.moas_mlppd[i])) {
      return "seed " + std::to_string(i) + ": BAS MLPPD " +
             fmt(cells.bas_mlppd[i]) + " not above MO-AS " +
             fmt(cells.moas_mlppd[i]);
    }
  }
  return {};
}

std::string oracle_subspace_equivalence() {
  auto [ds, spec] = generate_quadratic(8, 2, 400, 31337, 0.0);
  ReferenceSubspace ref = reference_subspace_from_gradients(*ds.gradients, 2);
  double angle = principal_angles(ref.W, spec.W).first();
  return check(angle <= 1e-6,
               "recovered angle " + fmt(angle) + " rad > 1e-6");
}

std::string baseline_hand_value() {
  Eigen::MatrixXd G(5, 2);
  for (int i = 0; i < 5; ++i) {
    G(i, 0) = 3.0;
    G(i, 1) = 4.0;
  }
  GradientCovariance cov = covariance_from_gradients(G);
  if (std::abs(cov.eigenvalues[0] - 25.0) > 1e-12)
    return "lambda1 = " + fmt(cov.eigenvalues[0]) + " != 25 within 1e-12";
  if (std::abs(cov.eigenvectors(0, 0) - 0.6) > 1e-12 ||
      std::abs(cov.eigenvectors(1, 0) - 0.8) > 1e-12)
    return "w1 != (0.6, 0.8) within 1e-12";
  return {};
}

std::string metric_unit_values() {
  Eigen::VectorXd actual(2), predicted(2);
  actual << 1.0, 1.0;
  predicted << 0.0, 1.0;
  if (std::abs(r_squared(actual, predicted) - 0.5) > 1e-12)
    return "R^2 hand case != 0.5";
  if (std::abs(r_squared(actual, actual) - 1.0) > 1e-15)
    return "R^2 at truth != 1";
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  if (std::abs(r_squared(actual, zero)) > 1e-15) return "R^2 at zero != 0";

  Eigen::VectorXd y(1), mu(1), sd(1);
  y << 0.0;
  mu << 0.0;
  sd << 1.0;
  if (std::abs(mlppd_closed_form(y, mu, sd, 1) + 0.918939) > 1e-6)
    return "MLPPD gamma=1 hand case != -0.918939";
  if (std::abs(mlppd_closed_form(y, mu, sd, 2) + 1.837877) > 1e-6)
    return "MLPPD gamma=2 hand case != -1.837877";
  mu << 1.0;
  if (std::abs(mlppd_closed_form(y, mu, sd, 1) + 1.418939) > 1e-6)
    return "MLPPD off-by-one hand case != -1.418939";

  Eigen::MatrixXd e1 = Eigen::MatrixXd::Identity(2, 2).col(0);
  Eigen::MatrixXd e2 = Eigen::MatrixXd::Identity(2, 2).col(1);
  if (std::abs(principal_angles(e1, e1).first()) > 1e-12)
    return "principal angle (U, U) != 0";
  if (std::abs(principal_angles(e1, e2).first() - M_PI / 2) > 1e-12)
    return "principal angle (e1, e2) != pi/2";
  Eigen::MatrixXd diag(2, 1);
  diag << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  if (std::abs(principal_angles(e1, diag).first() - M_PI / 4) > 1e-12)
    return "principal angle (e1, diagonal) != pi/4";

  Eigen::MatrixXd e1_3 = Eigen::MatrixXd::Identity(3, 3).col(0);
  Eigen::MatrixXd e2_3 = Eigen::MatrixXd::Identity(3, 3).col(1);
  if (std::abs(mean_first_subspace_angle({e1_3, e2_3}, e1_3) - M_PI / 4) >
      1e-12)
    return "MFSA of {0, pi/2} != pi/4";
  (void)kLog2Pi;
  return {};
}

int run_cli(const Context& ctx, const std::string& args,
            const fs::path& log) {
  std::string cmd = ctx.cli_path + " " + args + " > " + log.string() + " 2>&1";
  return std::system(cmd.c_str());
}

// Rows with the duration column blanked; comment lines dropped.
std::vector<std::string> comparable_rows(const fs::path& csv) {
  std::ifstream in(csv);
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) fields.push_back(cell);
    if (fields.size() == 11) fields[9] = "";  // training_seconds
    std::string joined;
    for (size_t i = 0; i < fields.size(); ++i) {
      joined += fields[i];
      if (i + 1 < fields.size()) joined += ",";
    }
    rows.push_back(joined);
  }
  return rows;
}

std::string end_to_end_determinism(const Context& ctx) {
  fs::path dir = ctx.workdir / "sweep_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path config = dir / "sweep.json";
  {
    std::ofstream out(config);
    out << R"({
      "dataset": {"generate": {"d": 5, "m": 1, "n": 60, "noise_std": 0.05, "seed": 12}},
      "methods": ["bas", "moas", "bgp"],
      "m": 1,
      "n_train": [12, 18],
      "seeds": [0, 1],
      "sampler": {"chains": 2, "draws": 60, "warmup": 60},
      "moas_restarts": 5,
      "bgp_n_grad": 60,
      "bgp_thin_draws": 8,
      "draws_per_sample": 4
    })";
  }
  for (const char* run : {"run1", "run2"}) {
    int rc = run_cli(ctx,
                     "sweep --config " + config.string() + " --out-dir " +
                         (dir / run).string(),
                     dir / (std::string(run) + ".log"));
    if (rc != 0)
      return std::string("CLI sweep failed for ") + run + " (exit " +
             std::to_string(rc) + ")";
  }
  auto rows1 = comparable_rows(dir / "run1" / "results.csv");
  auto rows2 = comparable_rows(dir / "run2" / "results.csv");
  if (rows1.empty()) return "first sweep produced no rows";
  if (rows1.size() != rows2.size())
    return "row counts differ: " + std::to_string(rows1.size()) + " vs " +
           std::to_string(rows2.size());
  for (size_t i = 0; i < rows1.size(); ++i) {
    if (rows1[i] != rows2[i])
      return "row " + std::to_string(i) + " differs:\n  " + rows1[i] +
             "\n  " + rows2[i];
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  ctx.workdir = fs::temp_directory_path() / "bas_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string flag = argv[i];
    if (flag == "--cli") ctx.cli_path = argv[i + 1];
    if (flag == "--workdir") ctx.workdir = argv[i + 1];
  }
  fs::create_directories(ctx.workdir);

  Runner runner;
  runner.add("orthonormality suite (1000 random Householder maps)",
             orthonormality_suite);
  runner.add("Haar prior check (d=10, m=1, 10000 draws)", haar_prior_check);
  runner.add("gradient contract (finite differences, (5,1) and (8,2))",
             gradient_contract);
  runner.add("sampler calibration (1-D standard normal)", sampler_calibration);
  runner.add("desk-scale AS recovery (d=10, BAS vs B-GP MFSA)",
             desk_scale_as_recovery);
  runner.add("deterministic accuracy ordering at sparse data (d=25, n=1d)",
             deterministic_accuracy_ordering);
  runner.add("probabilistic accuracy ordering (BAS MLPPD > MO-AS)",
             probabilistic_accuracy_ordering);
  runner.add("oracle subspace equivalence (noise-free quadratic)",
             oracle_subspace_equivalence);
  runner.add("baseline hand value (gradient (3,4) eigenpair)",
             baseline_hand_value);
  runner.add("metric unit values", metric_unit_values);
  if (!ctx.cli_path.empty()) {
    runner.add("end-to-end determinism (cmd_sweep twice)",
               [&ctx] { return end_to_end_determinism(ctx); });
  } else {
    runner.add("end-to-end determinism (cmd_sweep twice)", [] {
      return std::string("no --cli path provided");
    });
  }

  int failures = runner.run_all();
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
