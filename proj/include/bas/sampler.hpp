#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace bas {

using LogDensityFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
/// Combined evaluation: writes the gradient and returns the log density.
/// Preferred when both share expensive factorizations.
using ValueGradientFn =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct SamplerConfig {
  int chains = 4;
  int draws = 1000;
  int warmup = 500;
  std::uint64_t seed = 0;
  double target_accept = 0.8;
  int max_tree_depth = 10;

  void validate() const;
};

struct ChainDiagnostics {
  Eigen::VectorXd split_rhat;           // one entry per parameter
  std::vector<double> acceptance_rate;  // per chain, post-warmup mean
  std::vector<int> divergence_count;    // per chain, post-warmup
  std::vector<int> max_depth_count;     // per chain, post-warmup
  std::vector<double> step_size;        // per chain, adapted
};

struct SampleResult {
  std::vector<Eigen::MatrixXd> chains;  // each draws x dim
  ChainDiagnostics diagnostics;
};

/// One leapfrog step of the Hamiltonian (q, p) -> (q', p') with diagonal
/// inverse mass. Exposed for testing the integrator in isolation.
void leapfrog_step(Eigen::VectorXd& q, Eigen::VectorXd& p,
                   Eigen::VectorXd& grad, const GradientFn& gradient,
                   double step, const Eigen::VectorXd& inv_mass);

/// No-U-Turn sampler (multinomial variant) with dual-averaging step-size
/// adaptation and a diagonal mass matrix estimated during warmup.
/// Chains are independent given per-chain seeds derived from cfg.seed and may
/// run in parallel; the functions must be safe for concurrent calls.
/// Initial points are standard-normal draws; a chain whose initial
/// log density stays non-finite after 100 redraws raises NumericalError.
SampleResult nuts_sample(const LogDensityFn& logdensity,
                         const GradientFn& gradient, int dim,
                         const SamplerConfig& cfg);

SampleResult nuts_sample(const ValueGradientFn& value_gradient, int dim,
                         const SamplerConfig& cfg);

/// Split Gelman-Rubin statistic over one parameter's chains: each chain is
/// halved and R^ = sqrt(((n-1)/n W + B/n) / W) is computed over the halves.
/// Returns exactly 1 when every half has zero variance and equal means.
double split_rhat(const std::vector<Eigen::VectorXd>& chains);

}  // namespace bas
