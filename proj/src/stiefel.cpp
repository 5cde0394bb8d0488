#include "bas/stiefel.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "bas/error.hpp"
#include "bas/rng.hpp"

namespace bas {

namespace {

double sign_plus(double x) { return x < 0.0 ? -1.0 : 1.0; }

/// Apply H_i = blockdiag(I_{i-1}, -s (I - 2 u u^T)) to the rows of A in
/// place. `offset` = i - 1 is the first affected row.
void apply_stage(const HouseholderStage& st, int offset, Eigen::MatrixXd& A) {
  auto block = A.bottomRows(A.rows() - offset);
  Eigen::RowVectorXd t = st.u.transpose() * block;
  block = -st.sign * (block - 2.0 * st.u * t);
}

}  // namespace

int projection_param_count(int d, int m) {
  if (m < 1 || d < m) {
    throw InvalidArgumentError("projection_param_count requires 1 <= m <= d");
  }
  return m * d - m * (m - 1) / 2;
}

ProjectionParams::ProjectionParams(Eigen::VectorXd theta, int d_, int m_)
    : theta_p(std::move(theta)), d(d_), m(m_) {
  int k = projection_param_count(d, m);
  if (theta_p.size() != k) {
    throw InvalidArgumentError("theta_p has length " +
                               std::to_string(theta_p.size()) + ", expected " +
                               std::to_string(k));
  }
  if (!theta_p.allFinite()) {
    throw InvalidArgumentError("theta_p contains non-finite values");
  }
}

std::vector<HouseholderStage> householder_stages(const ProjectionParams& p) {
  std::vector<HouseholderStage> stages;
  stages.reserve(p.m);
  int offset = 0;
  for (int i = 1; i <= p.m; ++i) {
    int len = p.d - i + 1;
    Eigen::VectorXd v = p.theta_p.segment(offset, len);
    offset += len;
    double norm = v.norm();
    if (norm == 0.0) {
      throw InvalidArgumentError(
          "degenerate reflection: zero parameter slice at stage " +
          std::to_string(i));
    }
    HouseholderStage st;
    st.sign = sign_plus(v[0]);
    Eigen::VectorXd w = v;
    w[0] += st.sign * norm;
    st.u = w / w.norm();
    stages.push_back(std::move(st));
  }
  return stages;
}

Eigen::MatrixXd householder_map(const ProjectionParams& p) {
  auto stages = householder_stages(p);
  // W = H_m ... H_1 E where E holds the first m columns of I. Only the
  // d x m slab is carried through the chain.
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(p.d, p.m);
  for (int i = 0; i < p.m; ++i) {
    apply_stage(stages[i], i, W);
  }
  return W;
}

Eigen::VectorXd householder_pullback(const ProjectionParams& p,
                                     const Eigen::MatrixXd& grad_W) {
  if (grad_W.rows() != p.d || grad_W.cols() != p.m) {
    throw InvalidArgumentError("householder_pullback: gradient shape mismatch");
  }
  auto stages = householder_stages(p);

  // Forward pass, keeping the input A_i to every stage.
  std::vector<Eigen::MatrixXd> inputs(p.m);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(p.d, p.m);
  for (int i = 0; i < p.m; ++i) {
    inputs[i] = A;
    apply_stage(stages[i], i, A);
  }

  Eigen::VectorXd grad_theta(p.theta_p.size());
  int offset_end = static_cast<int>(p.theta_p.size());

  // Backward pass. G holds dL/d(output of stage i); stages are unwound from
  // the last to the first. dL/dH_i is never materialized: only its products
  // with u are needed.
  Eigen::MatrixXd G = grad_W;
  for (int i = p.m - 1; i >= 0; --i) {
    const auto& st = stages[i];
    const int len = p.d - i;
    auto A_sub = inputs[i].bottomRows(len);
    auto G_sub = G.bottomRows(len);

    // dL/du = 2 s [ (dL/dH^) u + (dL/dH^)^T u ] with dL/dH^ = G_sub A_sub^T.
    Eigen::VectorXd du =
        2.0 * st.sign *
        (G_sub * (A_sub.transpose() * st.u) + A_sub * (G_sub.transpose() * st.u));

    // u = w / ||w||, w = v + s ||v|| e1.
    int v_off = offset_end - len;
    Eigen::VectorXd v = p.theta_p.segment(v_off, len);
    double v_norm = v.norm();
    double w_norm = (v + st.sign * v_norm * Eigen::VectorXd::Unit(len, 0)).norm();
    Eigen::VectorXd dw = (du - st.u * st.u.dot(du)) / w_norm;
    Eigen::VectorXd dv = dw + (st.sign * dw[0] / v_norm) * v;
    grad_theta.segment(v_off, len) = dv;
    offset_end = v_off;

    // dL/dA_i = H_i^T G; H_i is symmetric, so reuse the forward application.
    apply_stage(st, i, G);
  }
  return grad_theta;
}

Eigen::MatrixXd tangent_project(const Eigen::MatrixXd& W,
                                const Eigen::MatrixXd& G) {
  if (W.rows() != G.rows() || W.cols() != G.cols()) {
    throw InvalidArgumentError("tangent_project: shape mismatch");
  }
  Eigen::MatrixXd WtW = W.transpose() * W;
  if ((WtW - Eigen::MatrixXd::Identity(W.cols(), W.cols()))
          .cwiseAbs()
          .maxCoeff() > 1e-8) {
    throw InvalidArgumentError("tangent_project: W is not orthonormal");
  }
  Eigen::MatrixXd WtG = W.transpose() * G;
  Eigen::MatrixXd sym = 0.5 * (WtG + WtG.transpose());
  return G - W * sym;
}

Eigen::MatrixXd qr_retract(const Eigen::MatrixXd& W,
                           const Eigen::MatrixXd& xi) {
  if (W.rows() != xi.rows() || W.cols() != xi.cols()) {
    throw InvalidArgumentError("qr_retract: shape mismatch");
  }
  Eigen::MatrixXd Y = W + xi;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  Eigen::MatrixXd Q =
      qr.householderQ() * Eigen::MatrixXd::Identity(W.rows(), W.cols());
  Eigen::MatrixXd R =
      qr.matrixQR().topRows(W.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    double r = R(j, j);
    if (std::abs(r) < 1e-14 * std::max(1.0, Y.norm())) {
      throw NumericalError("qr_retract: rank-deficient W + xi");
    }
    if (r < 0.0) Q.col(j) = -Q.col(j);
  }
  return Q;
}

HaarCheckReport haar_uniformity_check(int sample_count, int d, int m,
                                      std::uint64_t seed) {
  if (sample_count < 1000) {
    throw InvalidArgumentError(
        "haar_uniformity_check: sample_count must be >= 1000 for the "
        "statistics to be meaningful");
  }
  int k = projection_param_count(d, m);
  Rng rng(Rng::derive(seed, 0));

  HaarCheckReport report;
  report.sample_count = sample_count;
  report.d = d;
  report.m = m;
  report.first_col_mean = Eigen::VectorXd::Zero(d);
  report.first_col_sq_mean = Eigen::VectorXd::Zero(d);

  double abs_det_sum = 0.0;
  for (int s = 0; s < sample_count; ++s) {
    ProjectionParams p(rng.normal_vector(k), d, m);
    Eigen::MatrixXd W = householder_map(p);
    report.first_col_mean += W.col(0);
    report.first_col_sq_mean += W.col(0).cwiseAbs2();
    if (m == d) abs_det_sum += std::abs(W.determinant());
  }
  report.first_col_mean /= sample_count;
  report.first_col_sq_mean /= sample_count;
  if (m == d) report.mean_abs_det = abs_det_sum / sample_count;
  return report;
}

}  // namespace bas
