#include "bas.h"

#include <cstring>
#include <exception>
#include <optional>
#include <string>

#include "bas/data.hpp"
#include "bas/error.hpp"
#include "bas/surrogate.hpp"
#include "bas/version.hpp"
#include "bas/walkthrough.hpp"

struct bas_dataset {
  bas::Dataset data;
  std::optional<bas::QuadraticSpec> spec;
  int generated_n = 0;
};

struct bas_model {
  bas::Surrogate surrogate;
};

namespace {

thread_local std::string g_last_error;

bas_status to_status(const bas::Error& e) {
  switch (e.code()) {
    case bas::ErrorCode::InvalidArgument:
      return BAS_ERR_INVALID_ARGUMENT;
    case bas::ErrorCode::Numerical:
      return BAS_ERR_NUMERICAL;
    case bas::ErrorCode::Data:
      return BAS_ERR_DATA;
    case bas::ErrorCode::Io:
      return BAS_ERR_IO;
  }
  return BAS_ERR_INTERNAL;
}

template <typename Fn>
bas_status guarded(Fn&& fn) {
  try {
    fn();
    return BAS_OK;
  } catch (const bas::Error& e) {
    g_last_error = e.what();
    return to_status(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BAS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return BAS_ERR_INTERNAL;
  }
}

bas_status require(bool ok, const char* message) {
  if (ok) return BAS_OK;
  g_last_error = message;
  return BAS_ERR_INVALID_ARGUMENT;
}

bas::TrainConfig convert_config(const bas_train_config& cfg) {
  bas::TrainConfig out;
  switch (cfg.method) {
    case BAS_METHOD_BAS:
      out.method = bas::Method::Bas;
      break;
    case BAS_METHOD_MOAS:
      out.method = bas::Method::Moas;
      break;
    case BAS_METHOD_BGP:
      out.method = bas::Method::Bgp;
      break;
    default:
      throw bas::InvalidArgumentError("unknown method enum value");
  }
  out.m = cfg.m;
  out.n_train = cfg.n_train;
  out.seed = cfg.seed;
  out.sampler.chains = cfg.chains;
  out.sampler.draws = cfg.draws;
  out.sampler.warmup = cfg.warmup;
  out.sampler.seed = cfg.seed;
  out.sampler.target_accept = cfg.target_accept;
  out.sampler.max_tree_depth = cfg.max_tree_depth;
  out.moas_restarts = cfg.moas_restarts;
  out.moas_max_iterations = cfg.moas_max_iterations;
  out.bgp_n_grad = cfg.bgp_n_grad;
  out.bgp_thin_draws = cfg.bgp_thin_draws;
  out.draws_per_sample = cfg.draws_per_sample;
  return out;
}

}  // namespace

extern "C" {

const char* bas_version(void) { return bas::kVersion; }

const char* bas_last_error(void) { return g_last_error.c_str(); }

void bas_string_free(char* s) { delete[] s; }

bas_status bas_dataset_generate_quadratic(int32_t d, int32_t m, int32_t n,
                                          double noise_std, uint64_t seed,
                                          bas_dataset** out) {
  if (auto st = require(out != nullptr, "out must not be NULL")) return st;
  return guarded([&] {
    auto [ds, spec] = bas::generate_quadratic(d, m, n, seed, noise_std);
    auto* handle = new bas_dataset{std::move(ds), std::move(spec), n};
    *out = handle;
  });
}

bas_status bas_dataset_from_spec_file(const char* spec_path,
                                      bas_dataset** out) {
  if (auto st = require(out && spec_path, "spec_path/out must not be NULL"))
    return st;
  return guarded([&] {
    auto [spec, n] = bas::load_quadratic_spec_json(spec_path);
    bas::Dataset ds = bas::dataset_from_spec(spec, n);
    *out = new bas_dataset{std::move(ds), std::move(spec), n};
  });
}

bas_status bas_dataset_load_csv(const char* path, bas_dataset** out) {
  if (auto st = require(out && path, "path/out must not be NULL")) return st;
  return guarded([&] {
    *out = new bas_dataset{bas::load_dataset_csv(path), std::nullopt, 0};
  });
}

bas_status bas_dataset_save_csv(const bas_dataset* ds, const char* path) {
  if (auto st = require(ds && path, "ds/path must not be NULL")) return st;
  return guarded([&] { bas::save_dataset_csv(ds->data, path); });
}

bas_status bas_dataset_save_spec(const bas_dataset* ds, const char* path) {
  if (auto st = require(ds && path, "ds/path must not be NULL")) return st;
  return guarded([&] {
    if (!ds->spec) {
      throw bas::InvalidArgumentError(
          "dataset was not generated: no quadratic spec to save");
    }
    bas::save_quadratic_spec_json(*ds->spec, ds->generated_n, path);
  });
}

int32_t bas_dataset_rows(const bas_dataset* ds) {
  return ds ? static_cast<int32_t>(ds->data.rows()) : -1;
}

int32_t bas_dataset_dim(const bas_dataset* ds) {
  return ds ? static_cast<int32_t>(ds->data.dim()) : -1;
}

int32_t bas_dataset_has_gradients(const bas_dataset* ds) {
  return ds ? (ds->data.gradients.has_value() ? 1 : 0) : 0;
}

const char* bas_dataset_name(const bas_dataset* ds) {
  return ds ? ds->data.name.c_str() : "";
}

void bas_dataset_free(bas_dataset* ds) { delete ds; }

void bas_train_config_init(bas_train_config* cfg) {
  if (!cfg) return;
  cfg->method = BAS_METHOD_BAS;
  cfg->m = 1;
  cfg->n_train = 0;
  cfg->seed = 0;
  cfg->chains = 4;
  cfg->draws = 1000;
  cfg->warmup = 500;
  cfg->target_accept = 0.8;
  cfg->max_tree_depth = 10;
  cfg->moas_restarts = 500;
  cfg->moas_max_iterations = 1000;
  cfg->bgp_n_grad = 1000;
  cfg->bgp_thin_draws = 100;
  cfg->draws_per_sample = 10;
}

bas_status bas_train(const bas_dataset* ds, const bas_train_config* cfg,
                     bas_model** out) {
  if (auto st = require(ds && cfg && out, "ds/cfg/out must not be NULL"))
    return st;
  return guarded([&] {
    bas::TrainConfig config = convert_config(*cfg);
    *out = new bas_model{bas::train_surrogate(ds->data, config)};
  });
}

bas_status bas_model_save(const bas_model* model, const char* path) {
  if (auto st = require(model && path, "model/path must not be NULL"))
    return st;
  return guarded([&] { bas::save_surrogate_json(model->surrogate, path); });
}

bas_status bas_model_load(const char* path, bas_model** out) {
  if (auto st = require(path && out, "path/out must not be NULL")) return st;
  return guarded([&] {
    *out = new bas_model{bas::load_surrogate_json(path)};
  });
}

bas_status bas_model_diagnostics_json(const bas_model* model,
                                      char** out_json) {
  if (auto st = require(model && out_json, "model/out_json must not be NULL"))
    return st;
  return guarded([&] {
    std::string text = bas::diagnostics_json(model->surrogate);
    char* buffer = new char[text.size() + 1];
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    *out_json = buffer;
  });
}

double bas_model_training_seconds(const bas_model* model) {
  return model ? model->surrogate.training_seconds : -1.0;
}

int32_t bas_model_input_dim(const bas_model* model) {
  return model ? model->surrogate.d : -1;
}

void bas_model_free(bas_model* model) { delete model; }

bas_status bas_predict(const bas_model* model, const double* X, int32_t n,
                       int32_t d, double* median, double* mean, double* stddev,
                       double* q05, double* q95) {
  if (auto st = require(model && X, "model/X must not be NULL")) return st;
  if (auto st = require(n > 0 && d > 0, "n and d must be positive")) return st;
  return guarded([&] {
    Eigen::MatrixXd points(n, d);
    for (int32_t i = 0; i < n; ++i) {
      for (int32_t j = 0; j < d; ++j) points(i, j) = X[i * d + j];
    }
    bas::PredictiveSummary summary =
        bas::predict_surrogate(model->surrogate, points);
    for (int32_t i = 0; i < n; ++i) {
      if (median) median[i] = summary.median[i];
      if (mean) mean[i] = summary.mean[i];
      if (stddev) stddev[i] = summary.stddev[i];
      if (q05) q05[i] = summary.q05[i];
      if (q95) q95[i] = summary.q95[i];
    }
  });
}

bas_status bas_evaluate(const bas_model* model, const bas_dataset* ds,
                        int64_t split_seed_override, bas_metrics* out) {
  if (auto st = require(model && ds && out, "model/ds/out must not be NULL"))
    return st;
  return guarded([&] {
    std::optional<std::uint64_t> seed;
    if (split_seed_override >= 0) {
      seed = static_cast<std::uint64_t>(split_seed_override);
    }
    bas::MetricsReport report =
        bas::evaluate_surrogate(model->surrogate, ds->data, seed);
    out->r_squared = report.r_squared;
    out->mlppd = report.mlppd;
    out->has_mfsa = report.mfsa_rad.has_value() ? 1 : 0;
    out->mfsa_rad = report.mfsa_rad.value_or(0.0);
    out->training_seconds = report.training_seconds;
  });
}

bas_status bas_run_walkthrough(const char* manifest_path, const char* out_dir,
                               int32_t* cells_completed) {
  if (auto st = require(manifest_path && out_dir,
                        "manifest_path/out_dir must not be NULL"))
    return st;
  return guarded([&] {
    bas::WalkthroughManifest manifest =
        bas::load_walkthrough_manifest(manifest_path);
    int completed = bas::run_walkthrough(manifest, out_dir);
    if (cells_completed) *cells_completed = completed;
  });
}

}  // extern "C"
