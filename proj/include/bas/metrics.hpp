#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace bas {

/// Principal angles between two subspaces, in radians, each in [0, pi/2],
/// sorted descending so the first entry is the largest ("first") angle.
struct SubspaceAngles {
  Eigen::VectorXd angles;
  double first() const { return angles[0]; }
};

/// One row of a comparative-study table.
struct MetricsReport {
  double r_squared = 0.0;
  double mlppd = 0.0;
  std::optional<double> mfsa_rad;
  double training_seconds = 0.0;
  std::string method;
  std::string dataset;
  int d = 0;
  int m = 0;
  int n_train = 0;
  std::uint64_t seed = 0;
};

/// 1 - mean squared error / mean squared actual. The denominator is the raw
/// second moment of the actuals, not the centered variance.
double r_squared(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);

/// Mean over points of the log pointwise predictive density
/// -1/2 (y - mu)^2 / sigma^2 - log sigma - gamma/2 log 2 pi, in closed form
/// from per-point Gaussian moments.
double mlppd_closed_form(const Eigen::VectorXd& actual,
                         const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& stddev, int gamma);

/// Mean over points of an arbitrary per-point log-density evaluator
/// (used for the Monte-Carlo mixture form of the Bayesian methods).
double mlppd(const Eigen::VectorXd& actual,
             const std::function<double(int, double)>& log_density);

/// Principal angles via the singular values of U^T V; requires both inputs
/// to have orthonormal columns (within 1e-8).
SubspaceAngles principal_angles(const Eigen::MatrixXd& U,
                                const Eigen::MatrixXd& V);

/// Mean over a set of draws of the first (largest) principal angle to a
/// reference subspace.
double mean_first_subspace_angle(const std::vector<Eigen::MatrixXd>& draws,
                                 const Eigen::MatrixXd& reference);

/// Monotonic wall-clock duration of a training run, in seconds.
double time_training(const std::function<void()>& run);

}  // namespace bas
