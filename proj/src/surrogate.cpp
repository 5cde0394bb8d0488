#include "bas/surrogate.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "bas/error.hpp"
#include "bas/gp.hpp"

namespace bas {

namespace {

constexpr double kZ05 = -1.6448536269514722;  // 5% standard-normal quantile

/// FNV-1a over a string.
std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string canonical_config_text(const TrainConfig& cfg,
                                  const std::string& dataset_name) {
  char buf[512];
  std::snprintf(
      buf, sizeof(buf),
      "method=%s;m=%d;n_train=%d;seed=%llu;chains=%d;draws=%d;warmup=%d;"
      "target_accept=%.17g;max_tree_depth=%d;moas_restarts=%d;"
      "moas_max_iterations=%d;bgp_n_grad=%d;bgp_thin_draws=%d;"
      "draws_per_sample=%d;dataset=%s",
      method_name(cfg.method).c_str(), cfg.m, cfg.n_train,
      static_cast<unsigned long long>(cfg.seed), cfg.sampler.chains,
      cfg.sampler.draws, cfg.sampler.warmup, cfg.sampler.target_accept,
      cfg.sampler.max_tree_depth, cfg.moas_restarts, cfg.moas_max_iterations,
      cfg.bgp_n_grad, cfg.bgp_thin_draws, cfg.draws_per_sample,
      dataset_name.c_str());
  return buf;
}

MarginalPredictive marginal_for(const Surrogate& s,
                                const Eigen::MatrixXd& X_std) {
  return predict_marginal(s.samples, X_std, s.x_train, s.y_train,
                          s.config.draws_per_sample);
}

PredictiveDistribution moas_predict_std(const Surrogate& s,
                                        const Eigen::MatrixXd& X_std) {
  const MOASModel& pe = *s.point_estimate;
  GPPosterior post = GPPosterior::fit(s.x_train * pe.W, s.y_train, pe.hp);
  return post.predict(X_std * pe.W);
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Bas:
      return "bas";
    case Method::Moas:
      return "moas";
    case Method::Bgp:
      return "bgp";
  }
  throw InvalidArgumentError("unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "bas") return Method::Bas;
  if (name == "moas") return Method::Moas;
  if (name == "bgp") return Method::Bgp;
  throw InvalidArgumentError("unknown method '" + name +
                             "' (expected bas, moas, or bgp)");
}

void TrainConfig::validate(int d, int n_total) const {
  if (m < 1 || m > d) {
    throw InvalidArgumentError("train config: m must be in [1, d]");
  }
  if (n_train < m + 2) {
    throw InvalidArgumentError("train config: n_train must be >= m + 2");
  }
  if (n_train >= n_total) {
    throw InvalidArgumentError(
        "train config: n_train leaves no validation rows");
  }
  sampler.validate();
  if (moas_restarts < 1 || moas_max_iterations < 1) {
    throw InvalidArgumentError("train config: MO-AS options out of range");
  }
  if (bgp_n_grad < 1 || bgp_thin_draws < 1) {
    throw InvalidArgumentError("train config: B-GP options out of range");
  }
  if (draws_per_sample < 1) {
    throw InvalidArgumentError("train config: draws_per_sample must be >= 1");
  }
}

int Surrogate::mlppd_gamma() const {
  return method == Method::Bgp ? d : m;
}

std::string config_hash(const TrainConfig& cfg,
                        const std::string& dataset_name) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a(canonical_config_text(cfg, dataset_name))));
  return buf;
}

Surrogate train_surrogate(const Dataset& ds, const TrainConfig& cfg) {
  ds.validate();
  cfg.validate(static_cast<int>(ds.dim()), static_cast<int>(ds.rows()));

  StandardizedSplit prepared =
      standardize(split_dataset(ds, cfg.n_train, cfg.seed));

  Surrogate s;
  s.method = cfg.method;
  s.d = static_cast<int>(ds.dim());
  s.m = cfg.m;
  s.config = cfg;
  s.config.sampler.seed = cfg.seed;
  s.dataset_name = ds.name;
  s.standardization = prepared.constants;
  s.x_train = std::move(prepared.split.train.X);
  s.y_train = std::move(prepared.split.train.y);
  s.config_hash = config_hash(cfg, ds.name);

  SamplerConfig sampler_cfg = s.config.sampler;
  s.training_seconds = time_training([&] {
    switch (cfg.method) {
      case Method::Bas: {
        const int d = s.d;
        const int m = s.m;
        ValueGradientFn target = [&, d, m](const Eigen::VectorXd& v,
                                           Eigen::VectorXd& grad) {
          return log_posterior_value_gradient(BASParams::unpack(v, d, m),
                                              s.x_train, s.y_train, grad);
        };
        int dim = projection_param_count(d, m) + m + 2;
        SampleResult res = nuts_sample(target, dim, sampler_cfg);
        s.samples.chains = std::move(res.chains);
        s.samples.d = d;
        s.samples.gp_dim = m;
        s.samples.has_projection = true;
        s.samples.warmup = sampler_cfg.warmup;
        s.samples.seed = sampler_cfg.seed;
        s.samples.standardization = s.standardization;
        s.diagnostics = std::move(res.diagnostics);
        break;
      }
      case Method::Bgp: {
        s.samples =
            bgp_train(s.x_train, s.y_train, sampler_cfg, &s.diagnostics);
        s.samples.standardization = s.standardization;
        break;
      }
      case Method::Moas: {
        MOASOptions opts;
        opts.restarts = cfg.moas_restarts;
        opts.max_iterations = cfg.moas_max_iterations;
        opts.seed = cfg.seed;
        s.point_estimate = moas_train(s.x_train, s.y_train, cfg.m, opts);
        break;
      }
    }
  });

  return s;
}

PredictiveSummary predict_surrogate(const Surrogate& s,
                                    const Eigen::MatrixXd& X_original) {
  if (X_original.cols() != s.d) {
    throw InvalidArgumentError("predict: input dimension mismatch");
  }
  Eigen::MatrixXd X_std = s.standardization.apply_x(X_original);
  PredictiveSummary out;
  if (s.method == Method::Moas) {
    PredictiveDistribution pred = moas_predict_std(s, X_std);
    Eigen::VectorXd sd = pred.variance.cwiseSqrt();
    out.mean = s.standardization.invert_y(pred.mean);
    out.median = out.mean;  // Gaussian: median == mean
    out.stddev = sd * s.standardization.y_scale;
    out.q05 = s.standardization.invert_y(pred.mean + kZ05 * sd);
    out.q95 = s.standardization.invert_y(pred.mean - kZ05 * sd);
    return out;
  }
  PredictiveSummary std_summary = marginal_for(s, X_std).summarize();
  out.median = s.standardization.invert_y(std_summary.median);
  out.mean = s.standardization.invert_y(std_summary.mean);
  out.stddev = std_summary.stddev * s.standardization.y_scale;
  out.q05 = s.standardization.invert_y(std_summary.q05);
  out.q95 = s.standardization.invert_y(std_summary.q95);
  return out;
}

MetricsReport evaluate_surrogate(
    const Surrogate& s, const Dataset& ds,
    std::optional<std::uint64_t> split_seed_override) {
  ds.validate();
  if (ds.dim() != s.d) {
    throw DataError("evaluate: dataset dimension does not match the model");
  }
  std::uint64_t split_seed = split_seed_override.value_or(s.config.seed);
  SplitDataset split = split_dataset(ds, s.config.n_train, split_seed);
  const Eigen::MatrixXd& X_val = split.validation.X;
  const Eigen::VectorXd& y_val = split.validation.y;

  MetricsReport report;
  report.method = method_name(s.method);
  report.dataset = ds.name;
  report.d = s.d;
  report.m = s.m;
  report.n_train = s.config.n_train;
  report.seed = s.config.seed;
  report.training_seconds = s.training_seconds;

  const double y_scale = s.standardization.y_scale;
  const int gamma = s.mlppd_gamma();

  if (s.method == Method::Moas) {
    Eigen::MatrixXd X_std = s.standardization.apply_x(X_val);
    PredictiveDistribution pred = moas_predict_std(s, X_std);
    Eigen::VectorXd mean = s.standardization.invert_y(pred.mean);
    Eigen::VectorXd sd = pred.variance.cwiseSqrt() * y_scale;
    report.r_squared = r_squared(y_val, mean);
    report.mlppd = mlppd_closed_form(y_val, mean, sd, gamma);
  } else {
    Eigen::MatrixXd X_std = s.standardization.apply_x(X_val);
    MarginalPredictive marginal = marginal_for(s, X_std);
    PredictiveSummary summary = marginal.summarize();
    report.r_squared =
        r_squared(y_val, s.standardization.invert_y(summary.median));
    // Mixture log density in original units: shift each component by the
    // de-standardization scale.
    auto log_density = [&](int i, double y) {
      double y_std = (y - s.standardization.y_mean) / y_scale;
      return marginal.log_density(i, y_std, gamma) - std::log(y_scale);
    };
    report.mlppd = mlppd(y_val, log_density);
  }

  if (ds.gradients) {
    // Reference subspace in the model's standardized coordinates:
    // df/dx_std = x_scale .* df/dx.
    Eigen::MatrixXd G_std =
        *ds.gradients * s.standardization.x_scale.asDiagonal();
    Eigen::MatrixXd reference =
        reference_subspace_from_gradients(G_std, s.m).W;
    std::vector<Eigen::MatrixXd> draws;
    if (s.method == Method::Moas) {
      draws.push_back(s.point_estimate->W);
    } else if (s.method == Method::Bas) {
      draws = posterior_projections(s.samples);
    } else {
      draws = bgp_estimate_subspace(s.samples, s.x_train, s.y_train,
                                    s.config.bgp_n_grad, s.m, s.config.seed,
                                    s.config.bgp_thin_draws)
                  .Ws;
    }
    report.mfsa_rad = mean_first_subspace_angle(draws, reference);
  }
  return report;
}

}  // namespace bas
