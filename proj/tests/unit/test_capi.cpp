#include <doctest.h>

#include <cstring>
#include <fstream>
#include <filesystem>
#include <string>
#include <vector>

#include "bas.h"

namespace {

std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "bas_capi_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

bas_train_config tiny_config(bas_method method) {
  bas_train_config cfg;
  bas_train_config_init(&cfg);
  cfg.method = method;
  cfg.m = 1;
  cfg.n_train = 15;
  cfg.seed = 3;
  cfg.chains = 2;
  cfg.draws = 40;
  cfg.warmup = 40;
  cfg.moas_restarts = 4;
  cfg.moas_max_iterations = 100;
  cfg.bgp_n_grad = 50;
  cfg.bgp_thin_draws = 8;
  cfg.draws_per_sample = 4;
  return cfg;
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("defaults follow the reference configuration") {
  bas_train_config cfg;
  bas_train_config_init(&cfg);
  CHECK(cfg.chains == 4);
  CHECK(cfg.draws == 1000);
  CHECK(cfg.warmup == 500);
  CHECK(cfg.moas_restarts == 500);
  CHECK(cfg.bgp_n_grad == 1000);
  CHECK(cfg.target_accept == 0.8);
  CHECK(cfg.max_tree_depth == 10);
  CHECK(cfg.draws_per_sample == 10);
}

TEST_CASE("version is exposed") {
  CHECK(std::strlen(bas_version()) > 0);
}

TEST_CASE("dataset lifecycle through the C surface") {
  bas_dataset* ds = nullptr;
  REQUIRE(bas_dataset_generate_quadratic(4, 1, 60, 0.05, 9, &ds) == BAS_OK);
  CHECK(bas_dataset_rows(ds) == 60);
  CHECK(bas_dataset_dim(ds) == 4);
  CHECK(bas_dataset_has_gradients(ds) == 1);
  CHECK(std::string(bas_dataset_name(ds)).find("qf-d4") == 0);

  std::string csv = temp_path("ds.csv");
  std::string spec = temp_path("ds.spec.json");
  CHECK(bas_dataset_save_csv(ds, csv.c_str()) == BAS_OK);
  CHECK(bas_dataset_save_spec(ds, spec.c_str()) == BAS_OK);

  bas_dataset* loaded = nullptr;
  REQUIRE(bas_dataset_load_csv(csv.c_str(), &loaded) == BAS_OK);
  CHECK(bas_dataset_rows(loaded) == 60);
  CHECK(bas_dataset_has_gradients(loaded) == 1);

  bas_dataset* regen = nullptr;
  REQUIRE(bas_dataset_from_spec_file(spec.c_str(), &regen) == BAS_OK);
  CHECK(bas_dataset_rows(regen) == 60);
  // Regenerated and original datasets agree bit for bit through the CSV.
  std::string csv2 = temp_path("ds2.csv");
  CHECK(bas_dataset_save_csv(regen, csv2.c_str()) == BAS_OK);
  auto read_file = [](const std::string& p) {
    std::ifstream in(p);
    return std::string{std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>()};
  };
  CHECK(read_file(csv) == read_file(csv2));

  bas_dataset_free(ds);
  bas_dataset_free(loaded);
  bas_dataset_free(regen);

  // A loaded dataset has no generator spec to save.
  bas_dataset* plain = nullptr;
  REQUIRE(bas_dataset_load_csv(csv.c_str(), &plain) == BAS_OK);
  CHECK(bas_dataset_save_spec(plain, spec.c_str()) ==
        BAS_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(bas_last_error()) > 0);
  bas_dataset_free(plain);
}

TEST_CASE("error statuses for bad inputs") {
  bas_dataset* ds = nullptr;
  CHECK(bas_dataset_generate_quadratic(2, 5, 10, 0.05, 0, &ds) ==
        BAS_ERR_INVALID_ARGUMENT);
  CHECK(bas_dataset_load_csv("/nonexistent/nowhere.csv", &ds) == BAS_ERR_IO);
  CHECK(bas_dataset_generate_quadratic(2, 1, 10, 0.05, 0, nullptr) ==
        BAS_ERR_INVALID_ARGUMENT);
  bas_model* model = nullptr;
  CHECK(bas_model_load("/nonexistent/model.json", &model) == BAS_ERR_IO);
}

TEST_CASE("train, predict, evaluate, and reload") {
  bas_dataset* ds = nullptr;
  REQUIRE(bas_dataset_generate_quadratic(3, 1, 60, 0.05, 5, &ds) == BAS_OK);

  for (bas_method method : {BAS_METHOD_BAS, BAS_METHOD_MOAS, BAS_METHOD_BGP}) {
    CAPTURE(static_cast<int>(method));
    bas_train_config cfg = tiny_config(method);
    bas_model* model = nullptr;
    REQUIRE(bas_train(ds, &cfg, &model) == BAS_OK);
    CHECK(bas_model_training_seconds(model) > 0.0);
    CHECK(bas_model_input_dim(model) == 3);

    std::vector<double> X(2 * 3, 0.25);
    X[3] = -0.5;
    std::vector<double> median(2), mean(2), stddev(2), q05(2), q95(2);
    REQUIRE(bas_predict(model, X.data(), 2, 3, median.data(), mean.data(),
                        stddev.data(), q05.data(), q95.data()) == BAS_OK);
    CHECK(stddev[0] > 0.0);
    CHECK(q05[0] <= median[0]);
    CHECK(median[0] <= q95[0]);

    bas_metrics metrics{};
    REQUIRE(bas_evaluate(model, ds, -1, &metrics) == BAS_OK);
    CHECK(metrics.r_squared <= 1.0);
    CHECK(metrics.has_mfsa == 1);
    CHECK(metrics.training_seconds > 0.0);

    char* diag = nullptr;
    REQUIRE(bas_model_diagnostics_json(model, &diag) == BAS_OK);
    CHECK(std::strlen(diag) > 10);
    bas_string_free(diag);

    std::string path = temp_path("model_" +
                                 std::to_string(static_cast<int>(method)) +
                                 ".json");
    REQUIRE(bas_model_save(model, path.c_str()) == BAS_OK);
    bas_model* loaded = nullptr;
    REQUIRE(bas_model_load(path.c_str(), &loaded) == BAS_OK);
    bas_metrics metrics2{};
    REQUIRE(bas_evaluate(loaded, ds, -1, &metrics2) == BAS_OK);
    CHECK(metrics2.r_squared == metrics.r_squared);
    CHECK(metrics2.mlppd == metrics.mlppd);

    bas_model_free(loaded);
    bas_model_free(model);
  }
  bas_dataset_free(ds);
}

TEST_CASE("null-handle accessors degrade gracefully") {
  CHECK(bas_dataset_rows(nullptr) == -1);
  CHECK(bas_dataset_dim(nullptr) == -1);
  CHECK(bas_dataset_has_gradients(nullptr) == 0);
  CHECK(bas_model_training_seconds(nullptr) == -1.0);
  CHECK(bas_model_input_dim(nullptr) == -1);
  bas_dataset_free(nullptr);
  bas_model_free(nullptr);
  bas_string_free(nullptr);
}

}  // TEST_SUITE
