#include "bas/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/SVD>

#include "bas/error.hpp"

namespace bas {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

void require_orthonormal(const Eigen::MatrixXd& U, const char* name) {
  Eigen::MatrixXd G = U.transpose() * U;
  if ((G - Eigen::MatrixXd::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff() >
      1e-8) {
    throw InvalidArgumentError(std::string("principal_angles: ") + name +
                               " does not have orthonormal columns");
  }
}
}  // namespace

double r_squared(const Eigen::VectorXd& actual,
                 const Eigen::VectorXd& predicted) {
  if (actual.size() != predicted.size() || actual.size() == 0) {
    throw InvalidArgumentError("r_squared: length mismatch or empty input");
  }
  double denom = actual.squaredNorm();
  if (denom <= 0.0) {
    throw InvalidArgumentError("r_squared: undefined, sum of squared actuals is zero");
  }
  return 1.0 - (actual - predicted).squaredNorm() / denom;
}

double mlppd_closed_form(const Eigen::VectorXd& actual,
                         const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& stddev, int gamma) {
  if (actual.size() != mean.size() || actual.size() != stddev.size() ||
      actual.size() == 0) {
    throw InvalidArgumentError("mlppd: length mismatch or empty input");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    if (!(stddev[i] > 0.0)) {
      throw InvalidArgumentError("mlppd: nonpositive predictive stddev");
    }
    double r = (actual[i] - mean[i]) / stddev[i];
    total += -0.5 * r * r - std::log(stddev[i]) - 0.5 * gamma * kLog2Pi;
  }
  return total / actual.size();
}

double mlppd(const Eigen::VectorXd& actual,
             const std::function<double(int, double)>& log_density) {
  if (actual.size() == 0) {
    throw InvalidArgumentError("mlppd: empty input");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    total += log_density(static_cast<int>(i), actual[i]);
  }
  return total / actual.size();
}

SubspaceAngles principal_angles(const Eigen::MatrixXd& U,
                                const Eigen::MatrixXd& V) {
  if (U.rows() != V.rows()) {
    throw InvalidArgumentError("principal_angles: ambient dimension mismatch");
  }
  require_orthonormal(U, "U");
  require_orthonormal(V, "V");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(U.transpose() * V);
  Eigen::VectorXd s = svd.singularValues();
  SubspaceAngles out;
  out.angles.resize(s.size());
  // Singular values come out descending, so arccos yields ascending angles;
  // reverse to report the largest angle first.
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    double c = std::clamp(s[s.size() - 1 - i], 0.0, 1.0);
    out.angles[i] = std::acos(c);
  }
  return out;
}

double mean_first_subspace_angle(const std::vector<Eigen::MatrixXd>& draws,
                                 const Eigen::MatrixXd& reference) {
  if (draws.empty()) {
    throw InvalidArgumentError("mean_first_subspace_angle: empty draw list");
  }
  double total = 0.0;
  for (const auto& W : draws) {
    total += principal_angles(W, reference).first();
  }
  return total / static_cast<double>(draws.size());
}

double time_training(const std::function<void()>& run) {
  auto start = std::chrono::steady_clock::now();
  run();
  auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(end - start).count();
}

}  // namespace bas
