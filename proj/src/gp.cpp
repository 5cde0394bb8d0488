#include "bas/gp.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "bas/error.hpp"

namespace bas {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::MatrixXd noisy_kernel(const Eigen::MatrixXd& X,
                             const GPHyperparams& hp) {
  Eigen::MatrixXd K = kernel_matrix(X, X, hp);
  K.diagonal().array() += hp.sigma_n * hp.sigma_n;
  return K;
}

}  // namespace

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& K_noisy) {
  const double mean_diag = K_noisy.diagonal().mean();
  double factor = 1e-10;
  Eigen::MatrixXd K = K_noisy;
  while (factor <= 1e-4) {
    K = K_noisy;
    K.diagonal().array() += factor * mean_diag;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() == Eigen::Success) {
      return llt.matrixL();
    }
    factor *= 10.0;
  }
  throw NumericalError(
      "Cholesky factorization failed after jitter escalation to 1e-4");
}

double log_marginal_likelihood(const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y,
                               const GPHyperparams& hp) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw InvalidArgumentError("log_marginal_likelihood: shape mismatch");
  }
  hp.validate(static_cast<int>(X.cols()));
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd L = cholesky_with_jitter(noisy_kernel(X, hp));
  Eigen::VectorXd v = L.triangularView<Eigen::Lower>().solve(y);
  double log_det = 2.0 * L.diagonal().array().log().sum();
  return -0.5 * v.squaredNorm() - 0.5 * log_det - 0.5 * n * kLog2Pi;
}

Eigen::VectorXd log_marginal_likelihood_gradient(const Eigen::MatrixXd& X,
                                                 const Eigen::VectorXd& y,
                                                 const GPHyperparams& hp) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw InvalidArgumentError(
        "log_marginal_likelihood_gradient: shape mismatch");
  }
  hp.validate(static_cast<int>(X.cols()));
  const Eigen::Index n = X.rows();
  const Eigen::Index m = X.cols();

  Eigen::MatrixXd L = cholesky_with_jitter(noisy_kernel(X, hp));
  Eigen::VectorXd alpha = L.triangularView<Eigen::Lower>().solve(y);
  alpha = L.transpose().triangularView<Eigen::Upper>().solve(alpha);
  Eigen::MatrixXd Kinv = L.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(n, n));
  Kinv = L.transpose().triangularView<Eigen::Upper>().solve(Kinv);
  Eigen::MatrixXd M = alpha * alpha.transpose() - Kinv;

  KernelHyperGradients kg = kernel_hyper_gradients(X, hp);
  Eigen::VectorXd grad(2 + m);
  grad[0] = 0.5 * (M.cwiseProduct(kg.d_sigma_f)).sum();
  grad[1] = 0.5 * (M.cwiseProduct(kg.d_sigma_n)).sum();
  for (Eigen::Index i = 0; i < m; ++i) {
    grad[2 + i] = 0.5 * (M.cwiseProduct(kg.d_lengthscale[i])).sum();
  }
  return grad;
}

MarginalLikelihoodGradients log_marginal_likelihood_gradients_logspace(
    const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
    const GPHyperparams& hp) {
  if (Z.rows() != y.size() || Z.rows() < 1) {
    throw InvalidArgumentError(
        "log_marginal_likelihood_gradients_logspace: shape mismatch");
  }
  hp.validate(static_cast<int>(Z.cols()));
  const Eigen::Index n = Z.rows();
  const Eigen::Index m = Z.cols();

  Eigen::MatrixXd K = kernel_matrix(Z, Z, hp);
  Eigen::MatrixXd K_noisy = K;
  K_noisy.diagonal().array() += hp.sigma_n * hp.sigma_n;
  Eigen::MatrixXd L = cholesky_with_jitter(K_noisy);

  Eigen::VectorXd v = L.triangularView<Eigen::Lower>().solve(y);
  Eigen::VectorXd alpha =
      L.transpose().triangularView<Eigen::Upper>().solve(v);
  Eigen::MatrixXd Kinv = L.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(n, n));
  Kinv = L.transpose().triangularView<Eigen::Upper>().solve(Kinv);
  Eigen::MatrixXd M = alpha * alpha.transpose() - Kinv;
  Eigen::MatrixXd P = M.cwiseProduct(K);

  MarginalLikelihoodGradients g;
  g.value = -0.5 * v.squaredNorm() -
            L.diagonal().array().log().sum() - 0.5 * n * kLog2Pi;
  g.d_log_sigma_n = hp.sigma_n * hp.sigma_n * M.trace();
  g.d_log_sigma_f = 0.5 * P.sum();
  g.d_log_lengthscales.resize(m);
  Eigen::VectorXd row_sums = P.rowwise().sum();
  g.d_inputs.resize(n, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::VectorXd col = Z.col(i);
    Eigen::MatrixXd diff2 =
        (col.replicate(1, n) - col.transpose().replicate(n, 1)).array().square();
    double l2 = hp.lengthscales[i] * hp.lengthscales[i];
    g.d_log_lengthscales[i] = 0.5 * P.cwiseProduct(diff2).sum() / l2;
    // dL/dZ column i = (P z_i - rowsum(P) .* z_i) / l_i^2.
    g.d_inputs.col(i) = (P * col - row_sums.cwiseProduct(col)) / l2;
  }
  return g;
}

GPPosterior GPPosterior::fit(Eigen::MatrixXd X_train, const Eigen::VectorXd& y,
                             GPHyperparams hp) {
  if (X_train.rows() != y.size() || X_train.rows() < 1) {
    throw InvalidArgumentError("GPPosterior::fit: shape mismatch");
  }
  hp.validate(static_cast<int>(X_train.cols()));
  GPPosterior post;
  post.chol_ = cholesky_with_jitter(noisy_kernel(X_train, hp));
  Eigen::VectorXd v = post.chol_.triangularView<Eigen::Lower>().solve(y);
  post.alpha_ = post.chol_.transpose().triangularView<Eigen::Upper>().solve(v);
  post.x_train_ = std::move(X_train);
  post.hp_ = std::move(hp);
  return post;
}

PredictiveDistribution GPPosterior::predict(
    const Eigen::MatrixXd& X_star) const {
  if (X_star.cols() != x_train_.cols()) {
    throw InvalidArgumentError("GPPosterior::predict: dimension mismatch");
  }
  Eigen::MatrixXd K_star = kernel_matrix(X_star, x_train_, hp_);
  PredictiveDistribution out;
  out.mean = K_star * alpha_;
  // Pointwise variance: k(x*, x*) - ||L^-1 k_*||^2 + sigma_n^2.
  Eigen::MatrixXd v =
      chol_.triangularView<Eigen::Lower>().solve(K_star.transpose());
  double noise = hp_.sigma_n * hp_.sigma_n;
  out.variance = (hp_.sigma_f - v.colwise().squaredNorm().array() + noise)
                     .max(0.0)
                     .matrix();
  return out;
}

Eigen::VectorXd GPPosterior::mean_gradient(const Eigen::VectorXd& x_star) const {
  return kernel_input_gradient(x_star, x_train_, hp_) * alpha_;
}

}  // namespace bas
