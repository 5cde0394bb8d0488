#include "bas/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>

#include "bas/error.hpp"
#include "bas/gp.hpp"
#include "bas/rng.hpp"

namespace bas {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
// Stream offset separating prediction RNG streams from sampler streams.
constexpr std::uint64_t kPredictStreamBase = 0x9000000000000000ULL;

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double pos = p * static_cast<double>(n - 1);
  size_t lo = static_cast<size_t>(pos);
  if (lo >= n - 1) return sorted[n - 1];
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace

GPHyperparams hyperparams_from_log(const Eigen::VectorXd& log_hp) {
  if (log_hp.size() < 3) {
    throw InvalidArgumentError(
        "log_hp must hold (log sigma_n, log sigma_f, log lengthscales...)");
  }
  GPHyperparams hp;
  hp.sigma_n = std::exp(log_hp[0]);
  hp.sigma_f = std::exp(log_hp[1]);
  hp.lengthscales = log_hp.tail(log_hp.size() - 2).array().exp();
  return hp;
}

Eigen::VectorXd BASParams::pack() const {
  Eigen::VectorXd v(dim());
  v.head(theta_p.param_count()) = theta_p.theta_p;
  v.tail(log_hp.size()) = log_hp;
  return v;
}

BASParams BASParams::unpack(const Eigen::VectorXd& v, int d, int m) {
  int k = projection_param_count(d, m);
  if (v.size() != k + m + 2) {
    throw InvalidArgumentError("BASParams::unpack: wrong parameter count");
  }
  BASParams p;
  p.theta_p = ProjectionParams(v.head(k), d, m);
  p.log_hp = v.tail(m + 2);
  return p;
}

double log_prior(const BASParams& p) {
  Eigen::VectorXd v = p.pack();
  return -0.5 * v.squaredNorm() - 0.5 * v.size() * kLog2Pi;
}

double log_posterior(const BASParams& p, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y) {
  if (X.cols() != p.theta_p.d) {
    throw InvalidArgumentError("log_posterior: X has wrong column count");
  }
  Eigen::MatrixXd W = householder_map(p.theta_p);
  GPHyperparams hp = hyperparams_from_log(p.log_hp);
  return log_prior(p) + log_marginal_likelihood(X * W, y, hp);
}

Eigen::VectorXd log_posterior_gradient(const BASParams& p,
                                       const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y) {
  Eigen::VectorXd grad;
  log_posterior_value_gradient(p, X, y, grad);
  return grad;
}

double log_posterior_value_gradient(const BASParams& p,
                                    const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y,
                                    Eigen::VectorXd& grad) {
  if (X.cols() != p.theta_p.d) {
    throw InvalidArgumentError("log_posterior_gradient: X has wrong column count");
  }
  const int k = p.theta_p.param_count();
  const int m = p.theta_p.m;

  Eigen::MatrixXd W = householder_map(p.theta_p);
  GPHyperparams hp = hyperparams_from_log(p.log_hp);
  MarginalLikelihoodGradients g =
      log_marginal_likelihood_gradients_logspace(X * W, y, hp);

  grad.resize(k + m + 2);
  Eigen::MatrixXd grad_W = X.transpose() * g.d_inputs;
  grad.head(k) = householder_pullback(p.theta_p, grad_W);
  grad[k] = g.d_log_sigma_n;
  grad[k + 1] = g.d_log_sigma_f;
  grad.tail(m) = g.d_log_lengthscales;
  grad -= p.pack();  // standard-normal prior on every coordinate
  return log_prior(p) + g.value;
}

int PosteriorSamples::param_dim() const {
  int hyper = gp_dim + 2;
  return has_projection ? projection_param_count(d, gp_dim) + hyper : hyper;
}

Eigen::VectorXd PosteriorSamples::draw(int t) const {
  int per_chain = draws_per_chain();
  return chains[t / per_chain].row(t % per_chain).transpose();
}

void PosteriorSamples::validate() const {
  if (chains.empty()) {
    throw InvalidArgumentError("posterior samples: empty chain list");
  }
  const Eigen::Index rows = chains.front().rows();
  for (const auto& c : chains) {
    if (c.rows() != rows || c.cols() != param_dim()) {
      throw InvalidArgumentError(
          "posterior samples: inconsistent chain shapes");
    }
  }
  if (rows < 1) {
    throw InvalidArgumentError("posterior samples: chains are empty");
  }
}

MarginalPredictive::MarginalPredictive(Eigen::MatrixXd mu,
                                       Eigen::MatrixXd sigma,
                                       int draws_per_sample,
                                       std::uint64_t seed)
    : mu_(std::move(mu)),
      sigma_(std::move(sigma)),
      draws_per_sample_(draws_per_sample),
      seed_(seed) {
  if (mu_.rows() != sigma_.rows() || mu_.cols() != sigma_.cols()) {
    throw InvalidArgumentError("MarginalPredictive: moment shape mismatch");
  }
  if (draws_per_sample_ < 1) {
    throw InvalidArgumentError("draws_per_sample must be >= 1");
  }
}

PredictiveSummary MarginalPredictive::summarize() const {
  const int q = point_count();
  const int S = component_count();
  PredictiveSummary out;
  out.median.resize(q);
  out.mean.resize(q);
  out.stddev.resize(q);
  out.q05.resize(q);
  out.q95.resize(q);

  std::vector<double> pool(static_cast<size_t>(S) * draws_per_sample_);
  for (int j = 0; j < q; ++j) {
    size_t idx = 0;
    for (int s = 0; s < S; ++s) {
      Rng rng(Rng::derive(seed_, kPredictStreamBase +
                                     static_cast<std::uint64_t>(s) * q + j));
      for (int r = 0; r < draws_per_sample_; ++r) {
        pool[idx++] = mu_(s, j) + sigma_(s, j) * rng.normal();
      }
    }
    double mean = 0.0;
    for (double v : pool) mean += v;
    mean /= static_cast<double>(pool.size());
    double var = 0.0;
    for (double v : pool) var += (v - mean) * (v - mean);
    var /= static_cast<double>(pool.size());

    std::sort(pool.begin(), pool.end());
    out.mean[j] = mean;
    out.stddev[j] = std::sqrt(var);
    out.median[j] = quantile_sorted(pool, 0.5);
    out.q05[j] = quantile_sorted(pool, 0.05);
    out.q95[j] = quantile_sorted(pool, 0.95);
  }
  return out;
}

double MarginalPredictive::log_density(int point, double y, int gamma) const {
  const int S = component_count();
  double max_term = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd terms(S);
  for (int s = 0; s < S; ++s) {
    double sd = sigma_(s, point);
    if (!(sd > 0.0)) {
      throw InvalidArgumentError("log_density: nonpositive component stddev");
    }
    double r = (y - mu_(s, point)) / sd;
    terms[s] = -0.5 * r * r - std::log(sd);
    max_term = std::max(max_term, terms[s]);
  }
  double lse = max_term + std::log((terms.array() - max_term).exp().sum());
  return lse - std::log(static_cast<double>(S)) - 0.5 * gamma * kLog2Pi;
}

MarginalPredictive predict_marginal(const PosteriorSamples& samples,
                                    const Eigen::MatrixXd& X_star,
                                    const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& y,
                                    int draws_per_sample) {
  samples.validate();
  if (X.cols() != samples.d || X_star.cols() != samples.d) {
    throw InvalidArgumentError("predict_marginal: input dimension mismatch");
  }
  const int S = samples.total_draws();
  const int q = static_cast<int>(X_star.rows());
  const int k = samples.has_projection
                    ? projection_param_count(samples.d, samples.gp_dim)
                    : 0;

  Eigen::MatrixXd mu(S, q);
  Eigen::MatrixXd sigma(S, q);
  for (int t = 0; t < S; ++t) {
    Eigen::VectorXd v = samples.draw(t);
    GPHyperparams hp = hyperparams_from_log(v.tail(samples.gp_dim + 2));
    Eigen::MatrixXd Z_train;
    Eigen::MatrixXd Z_star;
    if (samples.has_projection) {
      ProjectionParams theta(v.head(k), samples.d, samples.gp_dim);
      Eigen::MatrixXd W = householder_map(theta);
      Z_train = X * W;
      Z_star = X_star * W;
    } else {
      Z_train = X;
      Z_star = X_star;
    }
    GPPosterior post = GPPosterior::fit(std::move(Z_train), y, hp);
    PredictiveDistribution pred = post.predict(Z_star);
    mu.row(t) = pred.mean.transpose();
    sigma.row(t) = pred.variance.cwiseSqrt().transpose();
  }
  return MarginalPredictive(std::move(mu), std::move(sigma), draws_per_sample,
                            samples.seed);
}

std::vector<Eigen::MatrixXd> posterior_projections(
    const PosteriorSamples& samples) {
  samples.validate();
  if (!samples.has_projection) {
    throw InvalidArgumentError(
        "posterior_projections: samples carry no projection parameters");
  }
  const int k = projection_param_count(samples.d, samples.gp_dim);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(samples.total_draws());
  for (int t = 0; t < samples.total_draws(); ++t) {
    Eigen::VectorXd v = samples.draw(t);
    out.push_back(householder_map(
        ProjectionParams(v.head(k), samples.d, samples.gp_dim)));
  }
  return out;
}

}  // namespace bas
