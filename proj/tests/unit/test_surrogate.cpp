#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <Eigen/Dense>

#include "bas/data.hpp"
#include "bas/error.hpp"
#include "bas/surrogate.hpp"

using namespace bas;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "bas_surrogate_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

TrainConfig tiny_config(Method method, int m, int n_train, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.method = method;
  cfg.m = m;
  cfg.n_train = n_train;
  cfg.seed = seed;
  cfg.sampler.chains = 2;
  cfg.sampler.draws = 60;
  cfg.sampler.warmup = 60;
  cfg.moas_restarts = 6;
  cfg.moas_max_iterations = 150;
  cfg.bgp_n_grad = 80;
  cfg.bgp_thin_draws = 10;
  cfg.draws_per_sample = 5;
  return cfg;
}

std::string file_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("surrogate") {

TEST_CASE("config validation") {
  auto [ds, spec] = generate_quadratic(4, 1, 30, 2);
  TrainConfig cfg = tiny_config(Method::Bas, 1, 2, 0);
  CHECK_THROWS_AS(cfg.validate(4, 30), InvalidArgumentError);  // n < m + 2
  cfg.n_train = 30;
  CHECK_THROWS_AS(cfg.validate(4, 30), InvalidArgumentError);  // no validation
  cfg.n_train = 20;
  cfg.m = 5;
  CHECK_THROWS_AS(cfg.validate(4, 30), InvalidArgumentError);  // m > d
}

TEST_CASE("bas end to end: train, predict, evaluate, persist") {
  auto [ds, spec] = generate_quadratic(4, 1, 80, 42);
  TrainConfig cfg = tiny_config(Method::Bas, 1, 25, 3);
  Surrogate s = train_surrogate(ds, cfg);

  CHECK(s.training_seconds > 0.0);
  CHECK(s.samples.total_draws() == 120);
  CHECK(s.diagnostics.split_rhat.size() ==
        projection_param_count(4, 1) + 3);
  CHECK(s.mlppd_gamma() == 1);

  PredictiveSummary pred = predict_surrogate(s, ds.X.topRows(6));
  for (int i = 0; i < 6; ++i) {
    CHECK(pred.q05[i] <= pred.median[i]);
    CHECK(pred.median[i] <= pred.q95[i]);
    CHECK(pred.stddev[i] > 0.0);
  }

  MetricsReport report = evaluate_surrogate(s, ds);
  CHECK(report.method == "bas");
  CHECK(report.n_train == 25);
  CHECK(report.r_squared <= 1.0);
  REQUIRE(report.mfsa_rad.has_value());
  CHECK(*report.mfsa_rad >= 0.0);
  CHECK(*report.mfsa_rad <= M_PI / 2 + 1e-12);

  auto path = temp_file("bas_model.json");
  save_surrogate_json(s, path.string());
  Surrogate loaded = load_surrogate_json(path.string());
  CHECK(loaded.method == Method::Bas);
  CHECK(loaded.d == 4);
  CHECK((loaded.x_train - s.x_train).cwiseAbs().maxCoeff() == 0.0);
  for (int c = 0; c < 2; ++c) {
    CHECK((loaded.samples.chains[c] - s.samples.chains[c])
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  // Bit-exact persistence: a second save emits the identical document.
  auto path2 = temp_file("bas_model_2.json");
  save_surrogate_json(loaded, path2.string());
  CHECK(file_text(path) == file_text(path2));

  // Evaluation from the reloaded model reproduces the metrics exactly.
  MetricsReport report2 = evaluate_surrogate(loaded, ds);
  CHECK(report2.r_squared == report.r_squared);
  CHECK(report2.mlppd == report.mlppd);
  CHECK(*report2.mfsa_rad == *report.mfsa_rad);
}

TEST_CASE("moas end to end with persistence") {
  auto [ds, spec] = generate_quadratic(3, 1, 60, 7);
  TrainConfig cfg = tiny_config(Method::Moas, 1, 20, 5);
  Surrogate s = train_surrogate(ds, cfg);
  REQUIRE(s.point_estimate.has_value());
  CHECK(s.point_estimate->restarts_used == 6);

  MetricsReport report = evaluate_surrogate(s, ds);
  CHECK(report.method == "moas");
  CHECK(report.mfsa_rad.has_value());

  auto path = temp_file("moas_model.json");
  save_surrogate_json(s, path.string());
  Surrogate loaded = load_surrogate_json(path.string());
  REQUIRE(loaded.point_estimate.has_value());
  CHECK((loaded.point_estimate->W - s.point_estimate->W)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(loaded.point_estimate->hp.sigma_n == s.point_estimate->hp.sigma_n);

  MetricsReport report2 = evaluate_surrogate(loaded, ds);
  CHECK(report2.r_squared == report.r_squared);
  CHECK(report2.mlppd == report.mlppd);
}

TEST_CASE("bgp end to end: gamma is d and subspace draws are thinned") {
  auto [ds, spec] = generate_quadratic(3, 1, 60, 9);
  TrainConfig cfg = tiny_config(Method::Bgp, 1, 20, 11);
  Surrogate s = train_surrogate(ds, cfg);
  CHECK(s.mlppd_gamma() == 3);
  CHECK_FALSE(s.samples.has_projection);
  CHECK(s.samples.param_dim() == 5);

  MetricsReport report = evaluate_surrogate(s, ds);
  CHECK(report.method == "bgp");
  CHECK(report.mfsa_rad.has_value());

  auto path = temp_file("bgp_model.json");
  save_surrogate_json(s, path.string());
  Surrogate loaded = load_surrogate_json(path.string());
  MetricsReport report2 = evaluate_surrogate(loaded, ds);
  CHECK(report2.mlppd == report.mlppd);
}

TEST_CASE("training is deterministic in the seed") {
  auto [ds, spec] = generate_quadratic(3, 1, 50, 13);
  TrainConfig cfg = tiny_config(Method::Bas, 1, 15, 21);
  Surrogate a = train_surrogate(ds, cfg);
  Surrogate b = train_surrogate(ds, cfg);
  for (int c = 0; c < 2; ++c) {
    CHECK((a.samples.chains[c] - b.samples.chains[c]).cwiseAbs().maxCoeff() ==
          0.0);
  }
  MetricsReport ra = evaluate_surrogate(a, ds);
  MetricsReport rb = evaluate_surrogate(b, ds);
  CHECK(ra.r_squared == rb.r_squared);
  CHECK(ra.mlppd == rb.mlppd);
  CHECK(*ra.mfsa_rad == *rb.mfsa_rad);
}

TEST_CASE("no gradients means no MFSA, not an error") {
  auto [ds, spec] = generate_quadratic(3, 1, 50, 17);
  ds.gradients.reset();
  TrainConfig cfg = tiny_config(Method::Moas, 1, 15, 2);
  Surrogate s = train_surrogate(ds, cfg);
  MetricsReport report = evaluate_surrogate(s, ds);
  CHECK_FALSE(report.mfsa_rad.has_value());
}

TEST_CASE("evaluate rejects mismatched dimensions") {
  auto [ds, spec] = generate_quadratic(3, 1, 50, 19);
  auto [other, other_spec] = generate_quadratic(4, 1, 50, 19);
  TrainConfig cfg = tiny_config(Method::Moas, 1, 15, 2);
  Surrogate s = train_surrogate(ds, cfg);
  CHECK_THROWS_AS(evaluate_surrogate(s, other), DataError);
}

TEST_CASE("config hash is stable and sensitive") {
  TrainConfig a = tiny_config(Method::Bas, 1, 20, 3);
  TrainConfig b = a;
  CHECK(config_hash(a, "ds") == config_hash(b, "ds"));
  b.seed = 4;
  CHECK(config_hash(a, "ds") != config_hash(b, "ds"));
  CHECK(config_hash(a, "ds") != config_hash(a, "other"));
}

TEST_CASE("perfect predictions give r_squared of one") {
  // A surrogate stub whose median predictions equal the actual values.
  Eigen::VectorXd y(4);
  y << 1.0, 2.0, -1.0, 0.5;
  CHECK(r_squared(y, y) == 1.0);
}

}  // TEST_SUITE
