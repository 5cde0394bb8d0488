#include "bas/walkthrough.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bas/error.hpp"
#include "bas/rng.hpp"
#include "bas/surrogate.hpp"
#include "bas/version.hpp"

namespace bas {

namespace {

using nlohmann::json;

struct Histogram {
  std::vector<double> edges;      // bins + 1
  std::vector<double> prior;      // normalized densities
  std::vector<double> posterior;  // normalized densities
};

Histogram make_histogram(const std::vector<double>& prior,
                         const std::vector<double>& posterior, int bins) {
  double lo = std::min(*std::min_element(prior.begin(), prior.end()),
                       *std::min_element(posterior.begin(), posterior.end()));
  double hi = std::max(*std::max_element(prior.begin(), prior.end()),
                       *std::max_element(posterior.begin(), posterior.end()));
  if (hi <= lo) hi = lo + 1.0;
  double width = (hi - lo) / bins;

  Histogram h;
  h.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) h.edges[b] = lo + b * width;
  h.prior.assign(bins, 0.0);
  h.posterior.assign(bins, 0.0);
  auto fill = [&](const std::vector<double>& values, std::vector<double>& out) {
    for (double v : values) {
      int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
      out[b] += 1.0;
    }
    for (double& c : out) c /= values.size() * width;
  };
  fill(prior, h.prior);
  fill(posterior, h.posterior);
  return h;
}

std::ofstream open_artifact(const std::filesystem::path& path,
                            const std::string& metadata) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write artifact: " + path.string());
  out << "# " << metadata << "\n";
  return out;
}

void write_cell(const Surrogate& s, const Dataset& ds,
                const WalkthroughManifest& manifest,
                const std::filesystem::path& dir) {
  const int k = projection_param_count(s.d, s.m);
  const int tracked = std::min(manifest.tracked_projection_params, k);
  const int hyper = s.m + 2;

  std::string metadata = "dataset=" + s.dataset_name + " m=" +
                         std::to_string(s.m) + " n_train=" +
                         std::to_string(s.config.n_train) + " seed=" +
                         std::to_string(s.config.seed) + " config_hash=" +
                         s.config_hash + " version=" + kVersion;

  std::vector<std::string> names;
  for (int j = 0; j < k; ++j) names.push_back("theta_p_" + std::to_string(j + 1));
  names.push_back("log_sigma_n");
  names.push_back("log_sigma_f");
  for (int j = 0; j < s.m; ++j) names.push_back("log_ell_" + std::to_string(j + 1));

  {  // chains.csv: tracked projection parameters and all hyperparameters
    auto out = open_artifact(dir / "chains.csv", metadata);
    out << "chain,draw";
    for (int j = 0; j < tracked; ++j) out << "," << names[j];
    for (int j = 0; j < hyper; ++j) out << "," << names[k + j];
    out << "\n";
    out.precision(17);
    for (int c = 0; c < s.samples.chain_count(); ++c) {
      const Eigen::MatrixXd& chain = s.samples.chains[c];
      for (int t = 0; t < chain.rows(); ++t) {
        out << c << "," << t;
        for (int j = 0; j < tracked; ++j) out << "," << chain(t, j);
        for (int j = 0; j < hyper; ++j) out << "," << chain(t, k + j);
        out << "\n";
      }
    }
  }

  {  // rhat.csv: every sampled parameter
    auto out = open_artifact(dir / "rhat.csv", metadata);
    out << "parameter,split_rhat\n";
    out.precision(17);
    for (int j = 0; j < k + hyper; ++j) {
      out << names[j] << "," << s.diagnostics.split_rhat[j] << "\n";
    }
  }

  {  // prior_vs_posterior.csv for the tracked parameters
    auto out = open_artifact(dir / "prior_vs_posterior.csv", metadata);
    out << "parameter,bin_lo,bin_hi,prior_density,posterior_density\n";
    out.precision(17);
    std::vector<int> tracked_ids;
    for (int j = 0; j < tracked; ++j) tracked_ids.push_back(j);
    for (int j = 0; j < hyper; ++j) tracked_ids.push_back(k + j);

    const int total = s.samples.total_draws();
    Rng prior_rng(Rng::derive(manifest.seed, 8000));
    for (int id : tracked_ids) {
      std::vector<double> post;
      post.reserve(total);
      for (const auto& chain : s.samples.chains) {
        for (int t = 0; t < chain.rows(); ++t) post.push_back(chain(t, id));
      }
      std::vector<double> prior(total);
      for (double& v : prior) v = prior_rng.normal();
      Histogram h = make_histogram(prior, post, manifest.histogram_bins);
      for (int b = 0; b < manifest.histogram_bins; ++b) {
        out << names[id] << "," << h.edges[b] << "," << h.edges[b + 1] << ","
            << h.prior[b] << "," << h.posterior[b] << "\n";
      }
    }
  }

  // Actual-vs-predicted tables on the training and validation blocks.
  SplitDataset split = split_dataset(ds, s.config.n_train, s.config.seed);
  auto table = [&](const Dataset& block, const char* file) {
    PredictiveSummary pred = predict_surrogate(s, block.X);
    auto out = open_artifact(dir / file, metadata);
    out << "actual,predicted_median,q05,q95\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      out << block.y[i] << "," << pred.median[i] << "," << pred.q05[i] << ","
          << pred.q95[i] << "\n";
    }
  };
  table(split.train, "train_actual_vs_predicted.csv");
  table(split.validation, "validation_actual_vs_predicted.csv");
}

}  // namespace

WalkthroughManifest load_walkthrough_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IoError("failed to parse manifest " + path + ": " + e.what());
  }

  try {
    WalkthroughManifest m;
    const json& dataset = doc.at("dataset");
    if (dataset.contains("path")) {
      m.dataset_path = dataset.at("path").get<std::string>();
    } else if (dataset.contains("generate")) {
      const json& g = dataset.at("generate");
      QuadraticGenSpec spec;
      spec.d = g.at("d").get<int>();
      spec.m = g.at("m").get<int>();
      spec.n = g.at("n").get<int>();
      spec.noise_std = g.value("noise_std", 0.05);
      spec.seed = g.value("seed", std::uint64_t{0});
      m.generate = spec;
    } else {
      throw IoError("manifest dataset must specify 'path' or 'generate'");
    }
    for (const json& cell : doc.at("cells")) {
      m.cells.push_back(
          {cell.at("m").get<int>(), cell.at("n_train").get<int>()});
    }
    if (m.cells.empty()) {
      throw InvalidArgumentError("manifest contains no cells");
    }
    if (doc.contains("sampler")) {
      const json& sj = doc.at("sampler");
      m.sampler.chains = sj.value("chains", m.sampler.chains);
      m.sampler.draws = sj.value("draws", m.sampler.draws);
      m.sampler.warmup = sj.value("warmup", m.sampler.warmup);
      m.sampler.target_accept = sj.value("target_accept", m.sampler.target_accept);
      m.sampler.max_tree_depth =
          sj.value("max_tree_depth", m.sampler.max_tree_depth);
    }
    m.seed = doc.value("seed", std::uint64_t{0});
    m.tracked_projection_params =
        doc.value("tracked_projection_params", m.tracked_projection_params);
    m.histogram_bins = doc.value("histogram_bins", m.histogram_bins);
    m.draws_per_sample = doc.value("draws_per_sample", m.draws_per_sample);
    return m;
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + path + ": " + e.what());
  }
}

int run_walkthrough(const WalkthroughManifest& manifest,
                    const std::string& out_dir) {
  Dataset ds;
  if (!manifest.dataset_path.empty()) {
    ds = load_dataset_csv(manifest.dataset_path);
  } else if (manifest.generate) {
    const QuadraticGenSpec& g = *manifest.generate;
    ds = generate_quadratic(g.d, g.m, g.n, g.seed, g.noise_std).first;
  } else {
    throw InvalidArgumentError("manifest has neither dataset path nor generator");
  }

  std::filesystem::create_directories(out_dir);
  int completed = 0;
  for (const WalkthroughCell& cell : manifest.cells) {
    std::filesystem::path dir =
        std::filesystem::path(out_dir) /
        ("cell_m" + std::to_string(cell.m) + "_n" + std::to_string(cell.n_train));
    std::filesystem::create_directories(dir);
    try {
      TrainConfig cfg;
      cfg.method = Method::Bas;
      cfg.m = cell.m;
      cfg.n_train = cell.n_train;
      cfg.seed = manifest.seed;
      cfg.sampler = manifest.sampler;
      cfg.draws_per_sample = manifest.draws_per_sample;
      Surrogate s = train_surrogate(ds, cfg);
      write_cell(s, ds, manifest, dir);
      ++completed;
    } catch (const Error& e) {
      std::ofstream out(dir / "error.txt");
      out << e.what() << "\n";
    }
  }
  return completed;
}

}  // namespace bas
