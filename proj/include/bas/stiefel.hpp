#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace bas {

/// Number of unconstrained parameters behind a d x m orthonormal matrix
/// under the Householder parametrization: m*d - m*(m-1)/2.
int projection_param_count(int d, int m);

/// Unconstrained parameters of an orthonormal d x m projection matrix.
struct ProjectionParams {
  Eigen::VectorXd theta_p;
  int d = 0;
  int m = 0;

  ProjectionParams() = default;
  ProjectionParams(Eigen::VectorXd theta, int d_, int m_);
  int param_count() const { return static_cast<int>(theta_p.size()); }
};

/// One reflection of the Householder chain: the full map is
/// W = H_m ... H_1 E with H_i = blockdiag(I_{i-1}, -sign (I - 2 u u^T)).
struct HouseholderStage {
  double sign = 1.0;
  Eigen::VectorXd u;  // unit vector of length d - i + 1
};

/// Decompose theta_p into the per-stage reflections. sgn(0) is taken as +1;
/// an exactly zero parameter slice raises InvalidArgumentError (degenerate
/// reflection).
std::vector<HouseholderStage> householder_stages(const ProjectionParams& p);

/// Map unconstrained parameters to a d x m matrix with orthonormal columns.
/// theta_p is consumed in contiguous slices of lengths d, d-1, ..., d-m+1.
Eigen::MatrixXd householder_map(const ProjectionParams& p);

/// Reverse-mode pullback of the Householder map: given dL/dW, returns
/// dL/dtheta_p. Exact up to the (measure-zero) sign discontinuities.
Eigen::VectorXd householder_pullback(const ProjectionParams& p,
                                     const Eigen::MatrixXd& grad_W);

/// Orthogonal projection of an ambient gradient G onto the tangent space of
/// the Stiefel manifold at W: G - W sym(W^T G).
Eigen::MatrixXd tangent_project(const Eigen::MatrixXd& W,
                                const Eigen::MatrixXd& G);

/// Thin-QR retraction of W + xi with the positive-diagonal R convention.
Eigen::MatrixXd qr_retract(const Eigen::MatrixXd& W, const Eigen::MatrixXd& xi);

/// Sample statistics of householder_map(theta_p) under theta_p ~ N(0, I),
/// used to check that W follows the Haar measure.
struct HaarCheckReport {
  int sample_count = 0;
  int d = 0;
  int m = 0;
  Eigen::VectorXd first_col_mean;     // per-entry mean of W(:, 0)
  Eigen::VectorXd first_col_sq_mean;  // per-entry mean of W(:, 0)^2
  double mean_abs_det = 0.0;          // only meaningful when m == d
};

HaarCheckReport haar_uniformity_check(int sample_count, int d, int m,
                                      std::uint64_t seed);

}  // namespace bas
