#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace bas {

/// Raw observations: inputs X (n x d), responses y (n), and optional
/// gradients of the underlying function at the same sites (n x d, original
/// coordinates).
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::optional<Eigen::MatrixXd> gradients;
  std::string name;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
  /// Throws DataError on NaN/Inf or shape inconsistencies.
  void validate() const;
};

/// Full description of a generated ridge quadratic
/// f(x) = z^T A z + b^T z + c + eps with z = W^T x; enough to regenerate the
/// dataset exactly.
struct QuadraticSpec {
  int d = 0;
  int m = 0;
  Eigen::MatrixXd W;  // d x m, orthonormal
  Eigen::MatrixXd A;  // m x m
  Eigen::VectorXd b;  // m
  double c = 0.0;
  double noise_std = 0.05;
  std::uint64_t seed = 0;
};

struct SplitDataset {
  Dataset train;
  Dataset validation;
  std::vector<int> train_indices;
  std::vector<int> validation_indices;
};

/// Affine transform fitted on the training split: X columns are z-scored and
/// y is centered and scaled, all with training statistics.
struct Standardization {
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;

  Eigen::MatrixXd apply_x(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd apply_y(const Eigen::VectorXd& y) const;
  Eigen::VectorXd invert_y(const Eigen::VectorXd& y_std) const;
};

struct StandardizedSplit {
  SplitDataset split;  // transformed in place
  Standardization constants;
};

/// Draw a random ridge quadratic (A, b, c ~ N(0,1), W Haar via the
/// Householder map) and evaluate it at n inputs uniform on [-1, 1]^d.
/// Analytic gradients W (2 A_sym z + b) of the noise-free map are stored.
std::pair<Dataset, QuadraticSpec> generate_quadratic(int d, int m, int n,
                                                     std::uint64_t seed,
                                                     double noise_std = 0.05);

/// Evaluate an existing quadratic spec at given inputs. noise_seed drives the
/// additive observation noise (ignored when spec.noise_std == 0).
Dataset evaluate_quadratic(const QuadraticSpec& spec, const Eigen::MatrixXd& X,
                           std::uint64_t noise_seed);

/// Regenerate the full dataset (inputs included) from a spec, reproducing
/// generate_quadratic bit for bit.
Dataset dataset_from_spec(const QuadraticSpec& spec, int n);

/// CSV with header x0,...,x{d-1},y[,g0,...,g{d-1}].
Dataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const Dataset& ds, const std::string& path);

/// Uniformly random disjoint partition into n_train / rest, deterministic in
/// the seed.
SplitDataset split_dataset(const Dataset& ds, int n_train, std::uint64_t seed);

/// Standardize using training statistics only; the validation part is
/// transformed with the same constants. Gradients are left in original
/// coordinates.
StandardizedSplit standardize(const SplitDataset& split);

}  // namespace bas
