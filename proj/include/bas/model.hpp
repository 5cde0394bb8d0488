#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bas/data.hpp"
#include "bas/kernel.hpp"
#include "bas/stiefel.hpp"

namespace bas {

/// Hyperparameters from sampling coordinates, fixed ordering
/// (log sigma_n, log sigma_f, log l_1, ..., log l_m).
GPHyperparams hyperparams_from_log(const Eigen::VectorXd& log_hp);

/// Unconstrained sampling coordinates of the fully Bayesian model: the
/// projection parameters followed by the log hyperparameters.
struct BASParams {
  ProjectionParams theta_p;
  Eigen::VectorXd log_hp;

  int dim() const {
    return theta_p.param_count() + static_cast<int>(log_hp.size());
  }
  Eigen::VectorXd pack() const;
  static BASParams unpack(const Eigen::VectorXd& v, int d, int m);
};

/// Sum of standard-normal log densities over every unconstrained coordinate;
/// sampling happens in log space for the hyperparameters, so no Jacobian
/// term appears.
double log_prior(const BASParams& p);

/// log_prior + log marginal likelihood of y under the GP on the projected
/// design X * householder_map(theta_p).
double log_posterior(const BASParams& p, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y);

/// Gradient of log_posterior over all k + m + 2 coordinates, hand-derived
/// through the kernel and the Householder chain.
Eigen::VectorXd log_posterior_gradient(const BASParams& p,
                                       const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y);

/// Value and gradient sharing one Cholesky factorization; the form the
/// sampler consumes.
double log_posterior_value_gradient(const BASParams& p,
                                    const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y,
                                    Eigen::VectorXd& grad);

/// MCMC draws of a trained Bayesian surrogate (BAS, or B-GP when
/// has_projection is false and gp_dim == d).
struct PosteriorSamples {
  std::vector<Eigen::MatrixXd> chains;  // each draws x param_dim
  int d = 0;
  int gp_dim = 0;
  bool has_projection = true;
  int warmup = 0;
  std::uint64_t seed = 0;
  Standardization standardization;

  int param_dim() const;
  int chain_count() const { return static_cast<int>(chains.size()); }
  int draws_per_chain() const {
    return chains.empty() ? 0 : static_cast<int>(chains.front().rows());
  }
  int total_draws() const { return chain_count() * draws_per_chain(); }
  /// Flat draw t across chains (chain-major ordering).
  Eigen::VectorXd draw(int t) const;
  void validate() const;
};

struct PredictiveSummary {
  Eigen::VectorXd median;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  Eigen::VectorXd q05;
  Eigen::VectorXd q95;
};

/// Conditional Gaussian moments per posterior draw; the marginal predictive
/// is the equally weighted mixture over draws.
class MarginalPredictive {
 public:
  MarginalPredictive(Eigen::MatrixXd mu, Eigen::MatrixXd sigma,
                     int draws_per_sample, std::uint64_t seed);

  int point_count() const { return static_cast<int>(mu_.cols()); }
  int component_count() const { return static_cast<int>(mu_.rows()); }
  const Eigen::MatrixXd& component_means() const { return mu_; }
  const Eigen::MatrixXd& component_stddevs() const { return sigma_; }

  /// Pooled sample statistics over draws_per_sample draws from every
  /// mixture component, seeded per (component, point) pair so evaluation
  /// order does not matter.
  PredictiveSummary summarize() const;

  /// log of the equally weighted Gaussian-mixture density at y for a given
  /// point, with the gamma-scaled normalization constant.
  double log_density(int point, double y, int gamma) const;

 private:
  Eigen::MatrixXd mu_;     // components x points
  Eigen::MatrixXd sigma_;  // components x points
  int draws_per_sample_;
  std::uint64_t seed_;
};

/// Fully Bayesian prediction: for every posterior draw, condition the GP on
/// the (projected) training data and collect the conditional moments at
/// X_star. All inputs are in the standardized coordinates the samples were
/// trained in.
MarginalPredictive predict_marginal(const PosteriorSamples& samples,
                                    const Eigen::MatrixXd& X_star,
                                    const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y,
                                    int draws_per_sample = 10);

/// Projection matrices of every posterior draw (BAS only).
std::vector<Eigen::MatrixXd> posterior_projections(
    const PosteriorSamples& samples);

}  // namespace bas
