#pragma once

#include <vector>

#include <Eigen/Core>

namespace bas {

/// Hyperparameters of the ARD squared-exponential kernel. sigma_f is the
/// signal variance (enters the kernel linearly), sigma_n the noise standard
/// deviation, and lengthscales holds one scale per input dimension of the
/// space the kernel operates on.
struct GPHyperparams {
  double sigma_f = 1.0;
  double sigma_n = 1.0;
  Eigen::VectorXd lengthscales;

  int dim() const { return static_cast<int>(lengthscales.size()); }
  /// Throws InvalidArgumentError unless all fields are strictly positive
  /// and the lengthscale count matches `expected_dim` (when >= 0).
  void validate(int expected_dim = -1) const;
};

/// k(a, b) = sigma_f * prod_i exp(-(a_i - b_i)^2 / (2 l_i^2)).
double ard_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  const GPHyperparams& hp);

/// Cross-kernel matrix with entry (i, j) = k(A_i, B_j).
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B,
                              const GPHyperparams& hp);

/// Derivatives of the training covariance with respect to the
/// hyperparameters, all evaluated at K = kernel_matrix(A, A).
struct KernelHyperGradients {
  Eigen::MatrixXd d_sigma_f;               // dK/dsigma_f = K / sigma_f
  Eigen::MatrixXd d_sigma_n;               // d(K + sigma_n^2 I)/dsigma_n
  std::vector<Eigen::MatrixXd> d_lengthscale;  // dK/dl_i, one per dimension
};

KernelHyperGradients kernel_hyper_gradients(const Eigen::MatrixXd& A,
                                            const GPHyperparams& hp);

/// Gradient of k(x*, X_j) with respect to x*, one column per training row:
/// column j = -diag(1/l^2) (x* - X_j) k(x*, X_j).
Eigen::MatrixXd kernel_input_gradient(const Eigen::VectorXd& x_star,
                                      const Eigen::MatrixXd& X,
                                      const GPHyperparams& hp);

}  // namespace bas
