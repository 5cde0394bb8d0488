#include "bas/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

#include "bas/error.hpp"
#include "bas/gp.hpp"
#include "bas/rng.hpp"
#include "bas/stiefel.hpp"

namespace bas {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 40;

struct RestartResult {
  bool ok = false;
  Eigen::MatrixXd W;
  Eigen::VectorXd log_hp;
  double loglik = -std::numeric_limits<double>::infinity();
  double grad_norm = std::numeric_limits<double>::infinity();
  bool reached_tolerance = false;
  std::vector<double> trace;
};

double objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const Eigen::MatrixXd& W, const Eigen::VectorXd& log_hp) {
  return log_marginal_likelihood(X * W, y, hyperparams_from_log(log_hp));
}

RestartResult run_restart(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          int m, const MOASOptions& opts, int restart) {
  const int d = static_cast<int>(X.cols());
  Rng rng(Rng::derive(opts.seed, 2000 + static_cast<std::uint64_t>(restart)));

  RestartResult res;
  Eigen::MatrixXd W = householder_map(
      ProjectionParams(rng.normal_vector(projection_param_count(d, m)), d, m));
  Eigen::VectorXd log_hp = rng.normal_vector(m + 2);

  double f = objective(X, y, W, log_hp);
  res.trace.push_back(f);
  double step_w = 1.0;
  double step_h = 1.0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    MarginalLikelihoodGradients g = log_marginal_likelihood_gradients_logspace(
        X * W, y, hyperparams_from_log(log_hp));
    Eigen::MatrixXd xi = tangent_project(W, X.transpose() * g.d_inputs);
    Eigen::VectorXd g_hp(m + 2);
    g_hp[0] = g.d_log_sigma_n;
    g_hp[1] = g.d_log_sigma_f;
    g_hp.tail(m) = g.d_log_lengthscales;

    double grad_norm = std::sqrt(xi.squaredNorm() + g_hp.squaredNorm());
    res.grad_norm = grad_norm;
    if (grad_norm <= opts.gradient_tolerance) {
      res.reached_tolerance = true;
      break;
    }

    // Riemannian ascent step on W with backtracking.
    bool advanced = false;
    double xi_sq = xi.squaredNorm();
    if (xi_sq > 0.0) {
      double t = step_w;
      for (int bt = 0; bt < kMaxBacktracks; ++bt) {
        Eigen::MatrixXd W_cand = qr_retract(W, t * xi);
        double f_cand = objective(X, y, W_cand, log_hp);
        if (f_cand >= f + kArmijo * t * xi_sq) {
          W = std::move(W_cand);
          f = f_cand;
          res.trace.push_back(f);
          step_w = t * 2.0;
          advanced = true;
          break;
        }
        t *= 0.5;
      }
      if (!advanced) step_w = std::max(step_w * 0.5, 1e-12);
    }

    // Log-space ascent step on the hyperparameters.
    double g_hp_sq = g_hp.squaredNorm();
    if (g_hp_sq > 0.0) {
      double t = step_h;
      for (int bt = 0; bt < kMaxBacktracks; ++bt) {
        Eigen::VectorXd cand = log_hp + t * g_hp;
        double f_cand = objective(X, y, W, cand);
        if (f_cand >= f + kArmijo * t * g_hp_sq) {
          log_hp = std::move(cand);
          f = f_cand;
          res.trace.push_back(f);
          step_h = t * 2.0;
          advanced = true;
          break;
        }
        t *= 0.5;
      }
      if (!advanced) step_h = std::max(step_h * 0.5, 1e-12);
    }

    if (!advanced) break;  // stalled along both directions
  }

  res.W = std::move(W);
  res.log_hp = std::move(log_hp);
  res.loglik = f;
  res.ok = true;
  return res;
}

}  // namespace

MOASModel moas_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int m,
                     const MOASOptions& opts) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw InvalidArgumentError("moas_train: shape mismatch");
  }
  if (m < 1 || m > X.cols()) {
    throw InvalidArgumentError("moas_train: m must be in [1, d]");
  }
  if (opts.restarts < 1) {
    throw InvalidArgumentError("moas_train: restarts must be >= 1");
  }

  std::vector<RestartResult> results(opts.restarts);
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, opts.restarts);
  std::vector<std::future<void>> futures;
  futures.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&, w] {
      for (int r = static_cast<int>(w); r < opts.restarts;
           r += static_cast<int>(workers)) {
        try {
          results[r] = run_restart(X, y, m, opts, r);
        } catch (const Error&) {
          results[r].ok = false;
        }
      }
    }));
  }
  for (auto& f : futures) f.get();

  int best = -1;
  int failed = 0;
  for (int r = 0; r < opts.restarts; ++r) {
    if (!results[r].ok) {
      ++failed;
      continue;
    }
    if (best < 0 || results[r].loglik > results[best].loglik) best = r;
  }
  if (best < 0) {
    throw NumericalError("moas_train: all " + std::to_string(failed) +
                         " restarts failed with conditioning errors");
  }

  MOASModel model;
  model.W = std::move(results[best].W);
  model.hp = hyperparams_from_log(results[best].log_hp);
  model.restarts_used = opts.restarts;
  model.failed_restarts = failed;
  model.best_loglik = results[best].loglik;
  model.final_grad_norm = results[best].grad_norm;
  model.reached_tolerance = results[best].reached_tolerance;
  model.objective_trace = std::move(results[best].trace);
  return model;
}

PosteriorSamples bgp_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const SamplerConfig& cfg,
                           ChainDiagnostics* diagnostics) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw InvalidArgumentError("bgp_train: shape mismatch");
  }
  const int d = static_cast<int>(X.cols());
  const int dim = d + 2;

  ValueGradientFn target = [&X, &y, d, dim](const Eigen::VectorXd& v,
                                            Eigen::VectorXd& grad) {
    GPHyperparams hp = hyperparams_from_log(v);
    MarginalLikelihoodGradients g =
        log_marginal_likelihood_gradients_logspace(X, y, hp);
    grad.resize(dim);
    grad[0] = g.d_log_sigma_n;
    grad[1] = g.d_log_sigma_f;
    grad.tail(d) = g.d_log_lengthscales;
    grad -= v;
    return g.value - 0.5 * v.squaredNorm() - 0.5 * dim * kLog2Pi;
  };

  SampleResult result = nuts_sample(target, dim, cfg);
  if (diagnostics) *diagnostics = result.diagnostics;
  PosteriorSamples samples;
  samples.chains = std::move(result.chains);
  samples.d = d;
  samples.gp_dim = d;
  samples.has_projection = false;
  samples.warmup = cfg.warmup;
  samples.seed = cfg.seed;
  return samples;
}

Eigen::MatrixXd GradientCovariance::leading(int m) const {
  if (m < 1 || m > eigenvectors.cols()) {
    throw InvalidArgumentError("GradientCovariance::leading: bad m");
  }
  return eigenvectors.leftCols(m);
}

GradientCovariance covariance_from_gradients(const Eigen::MatrixXd& G) {
  if (G.rows() < 1) {
    throw InvalidArgumentError("covariance_from_gradients: no samples");
  }
  if (!G.allFinite()) {
    throw DataError("covariance_from_gradients: gradients contain NaN/Inf");
  }
  const Eigen::Index d = G.cols();
  GradientCovariance out;
  out.C = G.transpose() * G / static_cast<double>(G.rows());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.C);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("covariance_from_gradients: eigendecomposition failed");
  }
  // The solver returns ascending eigenvalues; flip to descending. Ties keep
  // the first index first, and each column's largest-magnitude entry is made
  // positive, so the decomposition is deterministic.
  out.eigenvalues.resize(d);
  out.eigenvectors.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    out.eigenvalues[i] = eig.eigenvalues()[d - 1 - i];
    out.eigenvectors.col(i) = eig.eigenvectors().col(d - 1 - i);
  }
  for (Eigen::Index i = 0; i + 1 < d;) {
    Eigen::Index j = i;
    while (j + 1 < d && out.eigenvalues[j + 1] == out.eigenvalues[i]) ++j;
    // Flipping the solver order reversed any block of equal eigenvalues;
    // undo that so tied columns keep the solver's original ordering.
    for (Eigen::Index a = i, b = j; a < b; ++a, --b) {
      out.eigenvectors.col(a).swap(out.eigenvectors.col(b));
    }
    i = j + 1;
  }
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::Index max_row = 0;
    out.eigenvectors.col(c).cwiseAbs().maxCoeff(&max_row);
    if (out.eigenvectors(max_row, c) < 0.0) {
      out.eigenvectors.col(c) = -out.eigenvectors.col(c);
    }
  }
  return out;
}

ReferenceSubspace reference_subspace_from_gradients(const Eigen::MatrixXd& G,
                                                    int m) {
  if (m < 1 || m > G.cols()) {
    throw InvalidArgumentError("reference_subspace_from_gradients: bad m");
  }
  ReferenceSubspace out;
  out.covariance = covariance_from_gradients(G);
  out.W = out.covariance.leading(m);
  return out;
}

SubspaceDraws bgp_estimate_subspace(const PosteriorSamples& posterior,
                                    const Eigen::MatrixXd& X_train,
                                    const Eigen::VectorXd& y, int n_grad,
                                    int m, std::uint64_t seed,
                                    int thin_draws) {
  posterior.validate();
  if (posterior.has_projection) {
    throw InvalidArgumentError(
        "bgp_estimate_subspace: expected full-dimensional posterior");
  }
  if (n_grad < 1) {
    throw InvalidArgumentError("bgp_estimate_subspace: n_grad must be >= 1");
  }
  const int d = posterior.d;
  if (m < 1 || m > d) {
    throw InvalidArgumentError("bgp_estimate_subspace: m must be in [1, d]");
  }

  // Uniform gradient-evaluation sites in the bounding box of the training
  // inputs, shared across posterior draws.
  Eigen::VectorXd lo = X_train.colwise().minCoeff();
  Eigen::VectorXd hi = X_train.colwise().maxCoeff();
  Rng rng(Rng::derive(seed, 7001));
  Eigen::MatrixXd sites(n_grad, d);
  for (int i = 0; i < n_grad; ++i) {
    for (int j = 0; j < d; ++j) sites(i, j) = rng.uniform(lo[j], hi[j]);
  }

  const int total = posterior.total_draws();
  const int used = std::min(thin_draws < 1 ? total : thin_draws, total);
  std::vector<int> draw_ids(used);
  for (int t = 0; t < used; ++t) {
    draw_ids[t] = static_cast<int>(static_cast<long long>(t) * total / used);
  }

  SubspaceDraws out;
  out.Ws.resize(used);
  out.covariances.resize(used);
  for (int t = 0; t < used; ++t) {
    Eigen::VectorXd v = posterior.draw(draw_ids[t]);
    GPHyperparams hp = hyperparams_from_log(v);
    GPPosterior post = GPPosterior::fit(X_train, y, hp);
    Eigen::MatrixXd grads(n_grad, d);
    for (int i = 0; i < n_grad; ++i) {
      grads.row(i) = post.mean_gradient(sites.row(i).transpose()).transpose();
    }
    out.covariances[t] = covariance_from_gradients(grads);
    out.Ws[t] = out.covariances[t].leading(m);
  }
  return out;
}

}  // namespace bas
