#include "bas/kernel.hpp"

#include <cmath>
#include <string>

#include "bas/error.hpp"

namespace bas {

void GPHyperparams::validate(int expected_dim) const {
  if (!(sigma_f > 0.0)) {
    throw InvalidArgumentError("sigma_f must be strictly positive");
  }
  if (!(sigma_n > 0.0)) {
    throw InvalidArgumentError("sigma_n must be strictly positive");
  }
  if (lengthscales.size() == 0) {
    throw InvalidArgumentError("lengthscales must be nonempty");
  }
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
    if (!(lengthscales[i] > 0.0)) {
      throw InvalidArgumentError("lengthscale " + std::to_string(i) +
                                 " must be strictly positive");
    }
  }
  if (expected_dim >= 0 && dim() != expected_dim) {
    throw InvalidArgumentError(
        "lengthscale count " + std::to_string(dim()) +
        " does not match input dimension " + std::to_string(expected_dim));
  }
}

double ard_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  const GPHyperparams& hp) {
  if (a.size() != b.size() || a.size() != hp.lengthscales.size()) {
    throw InvalidArgumentError("ard_kernel: dimension mismatch");
  }
  double q = ((a - b).array() / hp.lengthscales.array()).square().sum();
  return hp.sigma_f * std::exp(-0.5 * q);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B,
                              const GPHyperparams& hp) {
  if (A.cols() != B.cols() || A.cols() != hp.lengthscales.size()) {
    throw InvalidArgumentError("kernel_matrix: dimension mismatch");
  }
  // Scale inputs once, then use the squared-distance expansion.
  Eigen::MatrixXd As = A * hp.lengthscales.cwiseInverse().asDiagonal();
  Eigen::MatrixXd Bs = B * hp.lengthscales.cwiseInverse().asDiagonal();
  Eigen::VectorXd a2 = As.rowwise().squaredNorm();
  Eigen::VectorXd b2 = Bs.rowwise().squaredNorm();
  Eigen::MatrixXd q = a2.replicate(1, Bs.rows()) +
                      b2.transpose().replicate(As.rows(), 1) -
                      2.0 * As * Bs.transpose();
  return hp.sigma_f * (-0.5 * q.array().max(0.0)).exp();
}

KernelHyperGradients kernel_hyper_gradients(const Eigen::MatrixXd& A,
                                            const GPHyperparams& hp) {
  if (A.cols() != hp.lengthscales.size()) {
    throw InvalidArgumentError("kernel_hyper_gradients: dimension mismatch");
  }
  const Eigen::Index n = A.rows();
  const Eigen::Index m = A.cols();
  Eigen::MatrixXd K = kernel_matrix(A, A, hp);

  KernelHyperGradients g;
  g.d_sigma_f = K / hp.sigma_f;
  g.d_sigma_n = 2.0 * hp.sigma_n * Eigen::MatrixXd::Identity(n, n);
  g.d_lengthscale.reserve(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double l3 = std::pow(hp.lengthscales[i], 3);
    Eigen::VectorXd col = A.col(i);
    Eigen::MatrixXd diff2 =
        (col.replicate(1, n) - col.transpose().replicate(n, 1)).array().square();
    g.d_lengthscale.push_back(K.cwiseProduct(diff2) / l3);
  }
  return g;
}

Eigen::MatrixXd kernel_input_gradient(const Eigen::VectorXd& x_star,
                                      const Eigen::MatrixXd& X,
                                      const GPHyperparams& hp) {
  if (x_star.size() != X.cols() || x_star.size() != hp.lengthscales.size()) {
    throw InvalidArgumentError("kernel_input_gradient: dimension mismatch");
  }
  const Eigen::Index n = X.rows();
  Eigen::VectorXd inv_l2 = hp.lengthscales.array().square().inverse();
  Eigen::MatrixXd grad(x_star.size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double k = ard_kernel(x_star, X.row(j).transpose(), hp);
    grad.col(j) = -k * inv_l2.cwiseProduct(x_star - X.row(j).transpose());
  }
  return grad;
}

}  // namespace bas
