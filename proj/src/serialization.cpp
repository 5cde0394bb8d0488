#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bas/error.hpp"
#include "bas/surrogate.hpp"
#include "bas/version.hpp"

namespace bas {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) {
    throw IoError("expected a non-empty array of rows");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(i);
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw IoError("ragged matrix rows in JSON document");
    }
    for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = row.at(c).get<double>();
  }
  return M;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

std::vector<std::string> hyperparameter_order(int gp_dim) {
  std::vector<std::string> order = {"log_sigma_n", "log_sigma_f"};
  for (int i = 1; i <= gp_dim; ++i) {
    order.push_back("log_ell_" + std::to_string(i));
  }
  return order;
}

json standardization_to_json(const Standardization& c) {
  return json{{"x_mean", vector_to_json(c.x_mean)},
              {"x_scale", vector_to_json(c.x_scale)},
              {"y_mean", c.y_mean},
              {"y_scale", c.y_scale}};
}

Standardization standardization_from_json(const json& j) {
  Standardization c;
  c.x_mean = vector_from_json(j.at("x_mean"));
  c.x_scale = vector_from_json(j.at("x_scale"));
  c.y_mean = j.at("y_mean").get<double>();
  c.y_scale = j.at("y_scale").get<double>();
  return c;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("failed to parse JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed while writing file: " + path);
}

}  // namespace

void save_surrogate_json(const Surrogate& s, const std::string& path) {
  json meta{{"method", method_name(s.method)},
            {"d", s.d},
            {"m", s.m},
            {"n_train", s.config.n_train},
            {"seed", s.config.seed},
            {"chains", s.config.sampler.chains},
            {"draws", s.config.sampler.draws},
            {"warmup", s.config.sampler.warmup},
            {"target_accept", s.config.sampler.target_accept},
            {"max_tree_depth", s.config.sampler.max_tree_depth},
            {"moas_restarts", s.config.moas_restarts},
            {"moas_max_iterations", s.config.moas_max_iterations},
            {"bgp_n_grad", s.config.bgp_n_grad},
            {"bgp_thin_draws", s.config.bgp_thin_draws},
            {"draws_per_sample", s.config.draws_per_sample},
            {"dataset", s.dataset_name},
            {"hyperparameter_order",
             hyperparameter_order(s.method == Method::Bgp ? s.d : s.m)},
            {"training_seconds", s.training_seconds}};

  json doc{{"format", "bas-surrogate"},
           {"artifact_version", kVersion},
           {"config_hash", s.config_hash},
           {"meta", std::move(meta)},
           {"standardization", standardization_to_json(s.standardization)},
           {"training_data",
            json{{"x", matrix_to_json(s.x_train)},
                 {"y", vector_to_json(s.y_train)}}}};

  if (s.method == Method::Moas) {
    const MOASModel& pe = *s.point_estimate;
    doc["point_estimate"] =
        json{{"W", matrix_to_json(pe.W)},
             {"sigma_n", pe.hp.sigma_n},
             {"sigma_f", pe.hp.sigma_f},
             {"lengthscales", vector_to_json(pe.hp.lengthscales)},
             {"restarts_used", pe.restarts_used},
             {"failed_restarts", pe.failed_restarts},
             {"best_loglik", pe.best_loglik},
             {"final_grad_norm", pe.final_grad_norm},
             {"reached_tolerance", pe.reached_tolerance}};
  } else {
    json chains = json::array();
    for (const auto& chain : s.samples.chains) {
      chains.push_back(matrix_to_json(chain));
    }
    doc["chains"] = std::move(chains);
    json diag{{"acceptance_rate", s.diagnostics.acceptance_rate},
              {"divergence_count", s.diagnostics.divergence_count},
              {"max_depth_count", s.diagnostics.max_depth_count},
              {"step_size", s.diagnostics.step_size},
              {"split_rhat", vector_to_json(s.diagnostics.split_rhat)}};
    doc["diagnostics"] = std::move(diag);
  }
  write_json_file(doc, path);
}

Surrogate load_surrogate_json(const std::string& path) {
  json doc = load_json_file(path);
  try {
    if (doc.at("format").get<std::string>() != "bas-surrogate") {
      throw IoError("not a surrogate file: " + path);
    }
    const json& meta = doc.at("meta");

    Surrogate s;
    s.method = method_from_name(meta.at("method").get<std::string>());
    s.d = meta.at("d").get<int>();
    s.m = meta.at("m").get<int>();
    s.config.method = s.method;
    s.config.m = s.m;
    s.config.n_train = meta.at("n_train").get<int>();
    s.config.seed = meta.at("seed").get<std::uint64_t>();
    s.config.sampler.chains = meta.at("chains").get<int>();
    s.config.sampler.draws = meta.at("draws").get<int>();
    s.config.sampler.warmup = meta.at("warmup").get<int>();
    s.config.sampler.target_accept = meta.at("target_accept").get<double>();
    s.config.sampler.max_tree_depth = meta.at("max_tree_depth").get<int>();
    s.config.sampler.seed = s.config.seed;
    s.config.moas_restarts = meta.at("moas_restarts").get<int>();
    s.config.moas_max_iterations = meta.at("moas_max_iterations").get<int>();
    s.config.bgp_n_grad = meta.at("bgp_n_grad").get<int>();
    s.config.bgp_thin_draws = meta.at("bgp_thin_draws").get<int>();
    s.config.draws_per_sample = meta.at("draws_per_sample").get<int>();
    s.dataset_name = meta.at("dataset").get<std::string>();
    s.training_seconds = meta.at("training_seconds").get<double>();
    s.config_hash = doc.at("config_hash").get<std::string>();
    s.standardization = standardization_from_json(doc.at("standardization"));
    s.x_train = matrix_from_json(doc.at("training_data").at("x"));
    s.y_train = vector_from_json(doc.at("training_data").at("y"));

    if (s.method == Method::Moas) {
      const json& pe = doc.at("point_estimate");
      MOASModel model;
      model.W = matrix_from_json(pe.at("W"));
      model.hp.sigma_n = pe.at("sigma_n").get<double>();
      model.hp.sigma_f = pe.at("sigma_f").get<double>();
      model.hp.lengthscales = vector_from_json(pe.at("lengthscales"));
      model.restarts_used = pe.at("restarts_used").get<int>();
      model.failed_restarts = pe.at("failed_restarts").get<int>();
      model.best_loglik = pe.at("best_loglik").get<double>();
      model.final_grad_norm = pe.at("final_grad_norm").get<double>();
      model.reached_tolerance = pe.at("reached_tolerance").get<bool>();
      s.point_estimate = std::move(model);
    } else {
      for (const json& chain : doc.at("chains")) {
        s.samples.chains.push_back(matrix_from_json(chain));
      }
      s.samples.d = s.d;
      s.samples.gp_dim = s.method == Method::Bgp ? s.d : s.m;
      s.samples.has_projection = s.method == Method::Bas;
      s.samples.warmup = s.config.sampler.warmup;
      s.samples.seed = s.config.seed;
      s.samples.standardization = s.standardization;
      s.samples.validate();
      const json& diag = doc.at("diagnostics");
      s.diagnostics.acceptance_rate =
          diag.at("acceptance_rate").get<std::vector<double>>();
      s.diagnostics.divergence_count =
          diag.at("divergence_count").get<std::vector<int>>();
      s.diagnostics.max_depth_count =
          diag.at("max_depth_count").get<std::vector<int>>();
      s.diagnostics.step_size = diag.at("step_size").get<std::vector<double>>();
      s.diagnostics.split_rhat = vector_from_json(diag.at("split_rhat"));
    }
    return s;
  } catch (const json::exception& e) {
    throw IoError("malformed surrogate file " + path + ": " + e.what());
  }
}

std::string diagnostics_json(const Surrogate& s) {
  json doc{{"method", method_name(s.method)},
           {"config_hash", s.config_hash},
           {"artifact_version", kVersion},
           {"training_seconds", s.training_seconds}};
  if (s.method == Method::Moas) {
    const MOASModel& pe = *s.point_estimate;
    doc["restarts_used"] = pe.restarts_used;
    doc["failed_restarts"] = pe.failed_restarts;
    doc["best_loglik"] = pe.best_loglik;
    doc["final_grad_norm"] = pe.final_grad_norm;
    doc["reached_tolerance"] = pe.reached_tolerance;
  } else {
    doc["split_rhat"] = vector_to_json(s.diagnostics.split_rhat);
    doc["acceptance_rate"] = s.diagnostics.acceptance_rate;
    doc["divergence_count"] = s.diagnostics.divergence_count;
    doc["max_depth_count"] = s.diagnostics.max_depth_count;
    doc["step_size"] = s.diagnostics.step_size;
  }
  return doc.dump(2) + "\n";
}

void save_quadratic_spec_json(const QuadraticSpec& spec, int n,
                              const std::string& path) {
  json doc{{"format", "bas-quadratic-spec"},
           {"artifact_version", kVersion},
           {"d", spec.d},
           {"m", spec.m},
           {"n", n},
           {"seed", spec.seed},
           {"noise_std", spec.noise_std},
           {"input_distribution", "uniform[-1,1]^d"},
           {"W", matrix_to_json(spec.W)},
           {"A", matrix_to_json(spec.A)},
           {"b", vector_to_json(spec.b)},
           {"c", spec.c}};
  write_json_file(doc, path);
}

std::pair<QuadraticSpec, int> load_quadratic_spec_json(const std::string& path) {
  json doc = load_json_file(path);
  try {
    if (doc.at("format").get<std::string>() != "bas-quadratic-spec") {
      throw IoError("not a quadratic spec file: " + path);
    }
    QuadraticSpec spec;
    spec.d = doc.at("d").get<int>();
    spec.m = doc.at("m").get<int>();
    spec.seed = doc.at("seed").get<std::uint64_t>();
    spec.noise_std = doc.at("noise_std").get<double>();
    spec.W = matrix_from_json(doc.at("W"));
    spec.A = matrix_from_json(doc.at("A"));
    spec.b = vector_from_json(doc.at("b"));
    spec.c = doc.at("c").get<double>();
    return {std::move(spec), doc.at("n").get<int>()};
  } catch (const json::exception& e) {
    throw IoError("malformed quadratic spec file " + path + ": " + e.what());
  }
}

}  // namespace bas
