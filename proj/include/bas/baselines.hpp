#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bas/kernel.hpp"
#include "bas/model.hpp"
#include "bas/sampler.hpp"

namespace bas {

/// Result of the maximum-likelihood manifold-optimization baseline.
struct MOASModel {
  Eigen::MatrixXd W;
  GPHyperparams hp;
  int restarts_used = 0;
  int failed_restarts = 0;
  double best_loglik = 0.0;
  double final_grad_norm = 0.0;
  bool reached_tolerance = false;
  /// Objective value after every accepted step of the winning restart;
  /// non-decreasing by the line-search contract.
  std::vector<double> objective_trace;
};

struct MOASOptions {
  int restarts = 500;
  int max_iterations = 1000;
  double gradient_tolerance = 1e-6;
  std::uint64_t seed = 0;
};

/// Jointly maximize the log marginal likelihood over W in St(m, d) and the
/// hyperparameters: Riemannian gradient steps on W (tangent projection +
/// QR retraction) interleaved with log-space steps on the hyperparameters,
/// both with backtracking line search. Every restart draws W from the Haar
/// measure and the hyperparameters from the log-normal prior; the restart
/// with the highest final likelihood wins.
MOASModel moas_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int m,
                     const MOASOptions& opts);

/// Full-dimensional Bayesian GP baseline: NUTS over the d + 2 log
/// hyperparameters under the same log-normal priors. Sampler diagnostics are
/// copied out when `diagnostics` is non-null.
PosteriorSamples bgp_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const SamplerConfig& cfg,
                           ChainDiagnostics* diagnostics = nullptr);

/// Average outer product of gradient samples with its eigendecomposition.
struct GradientCovariance {
  Eigen::MatrixXd C;
  Eigen::VectorXd eigenvalues;   // sorted descending
  Eigen::MatrixXd eigenvectors;  // columns matched to the eigenvalues

  /// Leading m eigenvectors (the active-subspace basis).
  Eigen::MatrixXd leading(int m) const;
};

/// C^ = (1/n) sum_i g_i g_i^T from rows of G, eigendecomposed with a
/// deterministic ordering (descending eigenvalues, ties by first index,
/// column signs fixed so the largest-magnitude entry is positive).
GradientCovariance covariance_from_gradients(const Eigen::MatrixXd& G);

/// Reference active subspace from observed gradient samples.
struct ReferenceSubspace {
  GradientCovariance covariance;
  Eigen::MatrixXd W;  // d x m
};

ReferenceSubspace reference_subspace_from_gradients(const Eigen::MatrixXd& G,
                                                    int m);

/// Per-draw subspace estimates extracted from a B-GP posterior: for each
/// (thinned) draw, the posterior mean gradient is evaluated at n_grad
/// uniform points in the bounding box of X_train and the leading m
/// eigenvectors of the resulting covariance form the draw's W.
struct SubspaceDraws {
  std::vector<Eigen::MatrixXd> Ws;
  std::vector<GradientCovariance> covariances;
};

SubspaceDraws bgp_estimate_subspace(const PosteriorSamples& posterior,
                                    const Eigen::MatrixXd& X_train,
                                    const Eigen::VectorXd& y, int n_grad,
                                    int m, std::uint64_t seed,
                                    int thin_draws = 100);

}  // namespace bas
