#pragma once

#include <Eigen/Core>

#include "bas/kernel.hpp"

namespace bas {

/// Cholesky factor of K + sigma_n^2 I, computed with an escalating jitter on
/// the diagonal. Throws NumericalError once the jitter reaches 1e-4 times the
/// mean diagonal without success.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& K_noisy);

/// log p(y | X, theta) = -1/2 y^T (K + sigma_n^2 I)^-1 y
///                       -1/2 log det(K + sigma_n^2 I) - n/2 log 2 pi.
double log_marginal_likelihood(const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y,
                               const GPHyperparams& hp);

/// Gradient of the log marginal likelihood over (sigma_f, sigma_n, l_1..l_m),
/// via dL/dpsi = 1/2 tr((alpha alpha^T - K_y^-1) dK_y/dpsi).
Eigen::VectorXd log_marginal_likelihood_gradient(const Eigen::MatrixXd& X,
                                                 const Eigen::VectorXd& y,
                                                 const GPHyperparams& hp);

/// Gradient pieces of the log marginal likelihood in log-hyperparameter
/// space, plus the gradient with respect to the (projected) inputs. Shared
/// by the fully Bayesian model, the B-GP baseline, and the MO-AS optimizer.
struct MarginalLikelihoodGradients {
  double value = 0.0;  // the log marginal likelihood itself
  double d_log_sigma_n = 0.0;
  double d_log_sigma_f = 0.0;
  Eigen::VectorXd d_log_lengthscales;
  Eigen::MatrixXd d_inputs;  // n x m', dL/dZ
};

MarginalLikelihoodGradients log_marginal_likelihood_gradients_logspace(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
    const GPHyperparams& hp);

struct PredictiveDistribution {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // pointwise, includes the sigma_n^2 noise term
};

/// Reusable factorization of a GP conditioned on (X_train, y).
class GPPosterior {
 public:
  static GPPosterior fit(Eigen::MatrixXd X_train, const Eigen::VectorXd& y,
                         GPHyperparams hp);

  const Eigen::MatrixXd& x_train() const { return x_train_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  const GPHyperparams& hyperparams() const { return hp_; }

  /// Posterior predictive moments at the rows of X_star.
  PredictiveDistribution predict(const Eigen::MatrixXd& X_star) const;

  /// Analytic gradient of the posterior mean at a single query point:
  /// kernel_input_gradient(x*, X_train, hp) * alpha.
  Eigen::VectorXd mean_gradient(const Eigen::VectorXd& x_star) const;

 private:
  Eigen::MatrixXd x_train_;
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd chol_;
  GPHyperparams hp_;
};

}  // namespace bas
