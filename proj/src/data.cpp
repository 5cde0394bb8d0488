#include "bas/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "bas/error.hpp"
#include "bas/rng.hpp"
#include "bas/stiefel.hpp"

namespace bas {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_cell(const std::string& cell, int row, int col) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("non-numeric value '" + cell + "' at data row " +
                    std::to_string(row) + ", column " + std::to_string(col));
  }
  if (!std::isfinite(value)) {
    throw DataError("non-finite value at data row " + std::to_string(row) +
                    ", column " + std::to_string(col));
  }
  return value;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

Dataset take_rows(const Dataset& ds, const std::vector<int>& indices,
                  const std::string& suffix) {
  Dataset out;
  out.X.resize(indices.size(), ds.dim());
  out.y.resize(indices.size());
  if (ds.gradients) out.gradients.emplace(indices.size(), ds.dim());
  for (size_t i = 0; i < indices.size(); ++i) {
    out.X.row(i) = ds.X.row(indices[i]);
    out.y[i] = ds.y[indices[i]];
    if (ds.gradients) out.gradients->row(i) = ds.gradients->row(indices[i]);
  }
  out.name = ds.name + suffix;
  return out;
}

}  // namespace

void Dataset::validate() const {
  if (X.rows() != y.size()) {
    throw DataError("dataset row count mismatch between X and y");
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw DataError("dataset contains NaN or Inf");
  }
  if (gradients) {
    if (gradients->rows() != X.rows() || gradients->cols() != X.cols()) {
      throw DataError("gradient matrix shape does not match X");
    }
    if (!gradients->allFinite()) {
      throw DataError("gradients contain NaN or Inf");
    }
  }
}

std::pair<Dataset, QuadraticSpec> generate_quadratic(int d, int m, int n,
                                                     std::uint64_t seed,
                                                     double noise_std) {
  if (d < 1 || m < 1 || m > d || n < 1) {
    throw InvalidArgumentError("generate_quadratic requires d >= m >= 1, n >= 1");
  }
  if (noise_std < 0.0) {
    throw InvalidArgumentError("noise_std must be nonnegative");
  }
  QuadraticSpec spec;
  spec.d = d;
  spec.m = m;
  spec.noise_std = noise_std;
  spec.seed = seed;

  Rng map_rng(Rng::derive(seed, 1));
  int k = projection_param_count(d, m);
  spec.W = householder_map(ProjectionParams(map_rng.normal_vector(k), d, m));
  spec.A.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) spec.A(i, j) = map_rng.normal();
  spec.b = map_rng.normal_vector(m);
  spec.c = map_rng.normal();

  Rng input_rng(Rng::derive(seed, 2));
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = input_rng.uniform(-1.0, 1.0);

  Dataset ds = evaluate_quadratic(spec, X, Rng::derive(seed, 3));
  ds.name = "qf-d" + std::to_string(d) + "-m" + std::to_string(m) + "-seed" +
            std::to_string(seed) + "-uniform_pm1";
  return {std::move(ds), std::move(spec)};
}

Dataset evaluate_quadratic(const QuadraticSpec& spec, const Eigen::MatrixXd& X,
                           std::uint64_t noise_seed) {
  if (X.cols() != spec.d) {
    throw InvalidArgumentError("evaluate_quadratic: input dimension mismatch");
  }
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd Z = X * spec.W;  // n x m
  Eigen::MatrixXd A_sym = 0.5 * (spec.A + spec.A.transpose());

  Dataset ds;
  ds.X = X;
  ds.y.resize(n);
  ds.gradients.emplace(n, spec.d);
  Rng noise_rng(noise_seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd z = Z.row(i).transpose();
    double value = z.dot(spec.A * z) + spec.b.dot(z) + spec.c;
    if (spec.noise_std > 0.0) value += spec.noise_std * noise_rng.normal();
    ds.y[i] = value;
    ds.gradients->row(i) = (spec.W * (2.0 * A_sym * z + spec.b)).transpose();
  }
  return ds;
}

Dataset dataset_from_spec(const QuadraticSpec& spec, int n) {
  Rng input_rng(Rng::derive(spec.seed, 2));
  Eigen::MatrixXd X(n, spec.d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < spec.d; ++j) X(i, j) = input_rng.uniform(-1.0, 1.0);
  Dataset ds = evaluate_quadratic(spec, X, Rng::derive(spec.seed, 3));
  ds.name = "qf-d" + std::to_string(spec.d) + "-m" + std::to_string(spec.m) +
            "-seed" + std::to_string(spec.seed) + "-uniform_pm1";
  return ds;
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_line(line);

  int d = 0;
  while (d < static_cast<int>(header.size()) &&
         header[d] == "x" + std::to_string(d)) {
    ++d;
  }
  if (d == 0 || d >= static_cast<int>(header.size()) || header[d] != "y") {
    throw DataError("dataset header must be x0,..,x{d-1},y[,g0,..]: " + path);
  }
  bool has_gradients = false;
  int expected_cols = d + 1;
  if (static_cast<int>(header.size()) > d + 1) {
    for (int j = 0; j < d; ++j) {
      if (d + 1 + j >= static_cast<int>(header.size()) ||
          header[d + 1 + j] != "g" + std::to_string(j)) {
        throw DataError("unexpected trailing columns in dataset header: " + path);
      }
    }
    if (static_cast<int>(header.size()) != 2 * d + 1) {
      throw DataError("unexpected trailing columns in dataset header: " + path);
    }
    has_gradients = true;
    expected_cols = 2 * d + 1;
  }

  std::vector<std::vector<double>> rows;
  int row_index = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (static_cast<int>(cells.size()) != expected_cols) {
      throw DataError("ragged row " + std::to_string(row_index) + ": expected " +
                      std::to_string(expected_cols) + " fields, got " +
                      std::to_string(cells.size()));
    }
    std::vector<double> values(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      values[c] = parse_cell(cells[c], row_index, static_cast<int>(c));
    }
    rows.push_back(std::move(values));
    ++row_index;
  }
  if (rows.empty()) throw DataError("dataset has no data rows: " + path);

  Dataset ds;
  ds.X.resize(rows.size(), d);
  ds.y.resize(rows.size());
  if (has_gradients) ds.gradients.emplace(rows.size(), d);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < d; ++j) ds.X(i, j) = rows[i][j];
    ds.y[i] = rows[i][d];
    if (has_gradients) {
      for (int j = 0; j < d; ++j) (*ds.gradients)(i, j) = rows[i][d + 1 + j];
    }
  }
  auto slash = path.find_last_of('/');
  ds.name = slash == std::string::npos ? path : path.substr(slash + 1);
  if (auto dot = ds.name.find_last_of('.'); dot != std::string::npos) {
    ds.name = ds.name.substr(0, dot);
  }
  ds.validate();
  return ds;
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file: " + path);
  const int d = static_cast<int>(ds.dim());
  for (int j = 0; j < d; ++j) out << "x" << j << ",";
  out << "y";
  if (ds.gradients) {
    for (int j = 0; j < d; ++j) out << ",g" << j;
  }
  out << "\n";
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    for (int j = 0; j < d; ++j) out << format_double(ds.X(i, j)) << ",";
    out << format_double(ds.y[i]);
    if (ds.gradients) {
      for (int j = 0; j < d; ++j) out << "," << format_double((*ds.gradients)(i, j));
    }
    out << "\n";
  }
  if (!out) throw IoError("failed while writing dataset file: " + path);
}

SplitDataset split_dataset(const Dataset& ds, int n_train, std::uint64_t seed) {
  ds.validate();
  const int n = static_cast<int>(ds.rows());
  if (n_train < 1 || n_train >= n) {
    throw InvalidArgumentError("split: n_train must be in [1, n-1], got " +
                               std::to_string(n_train));
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::derive(seed, 4));
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(rng.integer(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  SplitDataset out;
  out.train_indices.assign(order.begin(), order.begin() + n_train);
  out.validation_indices.assign(order.begin() + n_train, order.end());
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.validation_indices.begin(), out.validation_indices.end());
  out.train = take_rows(ds, out.train_indices, "/train");
  out.validation = take_rows(ds, out.validation_indices, "/validation");
  return out;
}

Eigen::MatrixXd Standardization::apply_x(const Eigen::MatrixXd& X) const {
  return (X.rowwise() - x_mean.transpose()) * x_scale.cwiseInverse().asDiagonal();
}

Eigen::VectorXd Standardization::apply_y(const Eigen::VectorXd& y) const {
  return (y.array() - y_mean) / y_scale;
}

Eigen::VectorXd Standardization::invert_y(const Eigen::VectorXd& y_std) const {
  return (y_std.array() * y_scale + y_mean).matrix();
}

StandardizedSplit standardize(const SplitDataset& split) {
  const Eigen::MatrixXd& X = split.train.X;
  const Eigen::Index p = X.rows();
  if (p < 2) throw DataError("standardize: training set needs >= 2 rows");

  Standardization c;
  c.x_mean = X.colwise().mean();
  c.x_scale.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double var = (X.col(j).array() - c.x_mean[j]).square().sum() / (p - 1);
    double sd = std::sqrt(var);
    if (!(sd > 0.0)) {
      throw DataError("zero-variance input column x" + std::to_string(j));
    }
    c.x_scale[j] = sd;
  }
  c.y_mean = split.train.y.mean();
  double y_var = (split.train.y.array() - c.y_mean).square().sum() / (p - 1);
  c.y_scale = std::sqrt(y_var);
  if (!(c.y_scale > 0.0)) {
    throw DataError("zero-variance response column y");
  }

  StandardizedSplit out;
  out.constants = c;
  out.split = split;
  out.split.train.X = c.apply_x(split.train.X);
  out.split.train.y = c.apply_y(split.train.y);
  out.split.validation.X = c.apply_x(split.validation.X);
  out.split.validation.y = c.apply_y(split.validation.y);
  return out;
}

}  // namespace bas
