#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "bas/baselines.hpp"
#include "bas/data.hpp"
#include "bas/metrics.hpp"
#include "bas/model.hpp"
#include "bas/sampler.hpp"

namespace bas {

enum class Method { Bas, Moas, Bgp };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// Full description of one training run; the single seed drives the
/// train/validation split, the sampler chains, the optimizer restarts, and
/// the prediction pooling.
struct TrainConfig {
  Method method = Method::Bas;
  int m = 1;
  int n_train = 0;
  std::uint64_t seed = 0;
  SamplerConfig sampler;  // sampler.seed is overwritten with `seed`
  int moas_restarts = 500;
  int moas_max_iterations = 1000;
  int bgp_n_grad = 1000;
  int bgp_thin_draws = 100;
  int draws_per_sample = 10;

  void validate(int d, int n_total) const;
};

/// A trained surrogate of any of the three methods, self-contained for
/// prediction: it carries the standardization constants and the
/// (standardized) training block alongside the posterior or point estimate.
struct Surrogate {
  Method method = Method::Bas;
  int d = 0;
  int m = 0;
  TrainConfig config;
  std::string dataset_name;
  std::string config_hash;
  Standardization standardization;
  Eigen::MatrixXd x_train;  // standardized
  Eigen::VectorXd y_train;  // standardized
  PosteriorSamples samples;                 // BAS / B-GP
  std::optional<MOASModel> point_estimate;  // MO-AS
  ChainDiagnostics diagnostics;             // BAS / B-GP
  double training_seconds = 0.0;

  /// gamma convention of the MLPPD: m for BAS and MO-AS, d for B-GP.
  int mlppd_gamma() const;
};

/// Split, standardize, and train; the reported duration covers the training
/// computation only.
Surrogate train_surrogate(const Dataset& ds, const TrainConfig& cfg);

/// Predictive summary at original-unit query points, de-standardized.
PredictiveSummary predict_surrogate(const Surrogate& s,
                                    const Eigen::MatrixXd& X_original);

/// Re-split the dataset with the surrogate's seed (or an override), then
/// compute R^2, MLPPD, and (when gradients are available) the MFSA against
/// the gradient-based reference subspace on the validation block.
MetricsReport evaluate_surrogate(
    const Surrogate& s, const Dataset& ds,
    std::optional<std::uint64_t> split_seed_override = std::nullopt);

/// Stable FNV-1a hash of the canonicalized configuration; embedded in every
/// output file for provenance.
std::string config_hash(const TrainConfig& cfg, const std::string& dataset_name);

// --- persistence (serialization.cpp) ---

void save_surrogate_json(const Surrogate& s, const std::string& path);
Surrogate load_surrogate_json(const std::string& path);
std::string diagnostics_json(const Surrogate& s);

void save_quadratic_spec_json(const QuadraticSpec& spec, int n,
                              const std::string& path);
std::pair<QuadraticSpec, int> load_quadratic_spec_json(const std::string& path);

}  // namespace bas
