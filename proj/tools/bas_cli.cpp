// Command-line front end over the bas C API: generate benchmark datasets,
// train any of the three surrogate methods, predict, evaluate, run
// comparative sweeps, and produce walkthrough artifacts.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bas.h"

namespace {

using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CliError : std::runtime_error {
  int exit_code;
  CliError(int code, const std::string& what)
      : std::runtime_error(what), exit_code(code) {}
};

[[noreturn]] void fail_api(const std::string& context) {
  throw CliError(kExitRuntime, context + ": " + bas_last_error());
}

void check(bas_status status, const std::string& context) {
  if (status == BAS_OK) return;
  if (status == BAS_ERR_INVALID_ARGUMENT) {
    throw CliError(kExitUsage, context + ": " + bas_last_error());
  }
  fail_api(context);
}

struct DatasetHandle {
  bas_dataset* ptr = nullptr;
  ~DatasetHandle() { bas_dataset_free(ptr); }
};

struct ModelHandle {
  bas_model* ptr = nullptr;
  ~ModelHandle() { bas_model_free(ptr); }
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// FNV-1a for the sweep config hash; mirrors the hash embedded in model files
// in spirit (the sweep hashes its whole canonicalized config document).
std::string hash_text(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitUsage, "cannot open config file: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw CliError(kExitUsage, "invalid JSON in " + path + ": " + e.what());
  }
}

// ---- train configuration ---------------------------------------------------

struct TrainArgs {
  std::string method = "bas";
  std::string data_path;
  int m = 1;
  int n_train = 0;
  std::uint64_t seed = 0;
  bas_train_config cfg;
  std::string config_path;
  std::string out_path;
  std::string diagnostics_path;
};

bas_method method_from_string(const std::string& name) {
  if (name == "bas") return BAS_METHOD_BAS;
  if (name == "moas") return BAS_METHOD_MOAS;
  if (name == "bgp") return BAS_METHOD_BGP;
  throw CliError(kExitUsage, "unknown method '" + name + "'");
}

// Shared scalar knobs (sampler + per-method options); used by both the train
// config file and the sweep config, which adds its own axis fields on top.
void apply_shared_knobs(const json& j, bas_train_config& cfg) {
  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    if (s.contains("chains")) cfg.chains = s.at("chains").get<int>();
    if (s.contains("draws")) cfg.draws = s.at("draws").get<int>();
    if (s.contains("warmup")) cfg.warmup = s.at("warmup").get<int>();
    if (s.contains("target_accept"))
      cfg.target_accept = s.at("target_accept").get<double>();
    if (s.contains("max_tree_depth"))
      cfg.max_tree_depth = s.at("max_tree_depth").get<int>();
  }
  if (j.contains("moas_restarts"))
    cfg.moas_restarts = j.at("moas_restarts").get<int>();
  if (j.contains("moas_max_iterations"))
    cfg.moas_max_iterations = j.at("moas_max_iterations").get<int>();
  if (j.contains("bgp_n_grad")) cfg.bgp_n_grad = j.at("bgp_n_grad").get<int>();
  if (j.contains("bgp_thin_draws"))
    cfg.bgp_thin_draws = j.at("bgp_thin_draws").get<int>();
  if (j.contains("draws_per_sample"))
    cfg.draws_per_sample = j.at("draws_per_sample").get<int>();
}

void apply_config_json(const json& j, bas_train_config& cfg,
                       std::string* method, std::string* data,
                       std::string* out) {
  if (j.contains("method") && method) *method = j.at("method").get<std::string>();
  if (j.contains("data") && data) *data = j.at("data").get<std::string>();
  if (j.contains("out") && out) *out = j.at("out").get<std::string>();
  if (j.contains("m")) cfg.m = j.at("m").get<int>();
  if (j.contains("n_train")) cfg.n_train = j.at("n_train").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  apply_shared_knobs(j, cfg);
}

// ---- results CSV ------------------------------------------------------------

const char* kResultsHeader =
    "method,dataset,d,m,n_train,seed,r_squared,mlppd,mfsa_rad,"
    "training_seconds,status";

std::string metrics_row(const std::string& method, const std::string& dataset,
                        int d, int m, int n_train, std::uint64_t seed,
                        const bas_metrics* metrics, const std::string& status) {
  std::ostringstream row;
  row << method << "," << dataset << "," << d << "," << m << "," << n_train
      << "," << seed << ",";
  if (metrics) {
    row << format_double(metrics->r_squared) << ","
        << format_double(metrics->mlppd) << ",";
    if (metrics->has_mfsa) row << format_double(metrics->mfsa_rad);
    row << "," << format_double(metrics->training_seconds);
  } else {
    row << ",,,";
  }
  row << "," << status;
  return row.str();
}

void append_results_row(const std::string& path, const std::string& row,
                        const std::string& provenance) {
  bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw CliError(kExitRuntime, "cannot write results file: " + path);
  if (fresh) {
    out << "# " << provenance << "\n";
    out << kResultsHeader << "\n";
  }
  out << row << "\n";
}

// ---- subcommand: generate ---------------------------------------------------

int cmd_generate(int d, int m, int n, double noise_std, std::uint64_t seed,
                 const std::string& out_path, std::string spec_path) {
  DatasetHandle ds;
  check(bas_dataset_generate_quadratic(d, m, n, noise_std, seed, &ds.ptr),
        "generate");
  check(bas_dataset_save_csv(ds.ptr, out_path.c_str()), "write dataset");
  if (spec_path.empty()) spec_path = out_path + ".spec.json";
  check(bas_dataset_save_spec(ds.ptr, spec_path.c_str()), "write spec");
  std::cout << "wrote " << out_path << " (" << n << " rows, d=" << d
            << ", m=" << m << ") and " << spec_path << "\n";
  return 0;
}

// ---- subcommand: train ------------------------------------------------------

int cmd_train(const TrainArgs& args) {
  if (args.data_path.empty()) {
    throw CliError(kExitUsage, "train: --data is required");
  }
  if (args.out_path.empty()) {
    throw CliError(kExitUsage, "train: --out is required");
  }
  DatasetHandle ds;
  check(bas_dataset_load_csv(args.data_path.c_str(), &ds.ptr), "load dataset");

  ModelHandle model;
  check(bas_train(ds.ptr, &args.cfg, &model.ptr), "train");
  check(bas_model_save(model.ptr, args.out_path.c_str()), "write model");

  std::string diag_path = args.diagnostics_path.empty()
                              ? args.out_path + ".diagnostics.json"
                              : args.diagnostics_path;
  char* diag = nullptr;
  check(bas_model_diagnostics_json(model.ptr, &diag), "diagnostics");
  std::unique_ptr<char, decltype(&bas_string_free)> diag_guard(
      diag, &bas_string_free);
  std::ofstream out(diag_path);
  if (!out) throw CliError(kExitRuntime, "cannot write " + diag_path);
  out << diag;

  std::cout << "trained " << args.method << " on " << bas_dataset_name(ds.ptr)
            << " in " << bas_model_training_seconds(model.ptr) << " s; wrote "
            << args.out_path << " and " << diag_path << "\n";
  return 0;
}

struct ModelMeta {
  std::string method;
  std::string dataset;
  int d = 0;
  int m = 0;
  int n_train = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

ModelMeta read_model_meta(const std::string& path) {
  json doc = load_json_file(path);
  ModelMeta meta;
  try {
    const json& m = doc.at("meta");
    meta.method = m.at("method").get<std::string>();
    meta.dataset = m.at("dataset").get<std::string>();
    meta.d = m.at("d").get<int>();
    meta.m = m.at("m").get<int>();
    meta.n_train = m.at("n_train").get<int>();
    meta.seed = m.at("seed").get<std::uint64_t>();
    meta.config_hash = doc.at("config_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw CliError(kExitRuntime,
                   "malformed model file " + path + ": " + e.what());
  }
  return meta;
}

// ---- subcommand: predict ----------------------------------------------------

// Reads a CSV whose first d columns are x0..x{d-1}; extra columns (y,
// gradients) are ignored.
std::vector<double> load_inputs_csv(const std::string& path, int d, int* n_out) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitUsage, "cannot open inputs file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw CliError(kExitRuntime, "empty inputs file: " + path);
  }
  std::vector<double> values;
  int rows = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (col < d && std::getline(ss, cell, ',')) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size()) {
        throw CliError(kExitRuntime, path + ":" + std::to_string(line_no) +
                                         ": non-numeric cell '" + cell + "'");
      }
      values.push_back(v);
      ++col;
    }
    if (col != d) {
      throw CliError(kExitRuntime, path + ":" + std::to_string(line_no) +
                                       ": expected at least " +
                                       std::to_string(d) + " columns");
    }
    ++rows;
  }
  *n_out = rows;
  return values;
}

int cmd_predict(const std::string& model_path, const std::string& inputs_path,
                const std::string& out_path) {
  ModelHandle model;
  check(bas_model_load(model_path.c_str(), &model.ptr), "load model");
  int d = bas_model_input_dim(model.ptr);
  int n = 0;
  std::vector<double> X = load_inputs_csv(inputs_path, d, &n);

  std::vector<double> median(n), mean(n), stddev(n), q05(n), q95(n);
  check(bas_predict(model.ptr, X.data(), n, d, median.data(), mean.data(),
                    stddev.data(), q05.data(), q95.data()),
        "predict");

  ModelMeta meta = read_model_meta(model_path);
  std::ofstream out(out_path);
  if (!out) throw CliError(kExitRuntime, "cannot write " + out_path);
  out << "# config_hash=" << meta.config_hash << " version=" << bas_version()
      << "\n";
  out << "median,mean,stddev,q05,q95\n";
  for (int i = 0; i < n; ++i) {
    out << format_double(median[i]) << "," << format_double(mean[i]) << ","
        << format_double(stddev[i]) << "," << format_double(q05[i]) << ","
        << format_double(q95[i]) << "\n";
  }
  std::cout << "wrote " << n << " predictions to " << out_path << "\n";
  return 0;
}

// ---- subcommand: evaluate ---------------------------------------------------

int cmd_evaluate(const std::string& model_path, const std::string& data_path,
                 std::int64_t split_seed, const std::string& out_path) {
  ModelHandle model;
  check(bas_model_load(model_path.c_str(), &model.ptr), "load model");
  DatasetHandle ds;
  check(bas_dataset_load_csv(data_path.c_str(), &ds.ptr), "load dataset");

  bas_metrics metrics{};
  check(bas_evaluate(model.ptr, ds.ptr, split_seed, &metrics), "evaluate");

  ModelMeta meta = read_model_meta(model_path);
  std::string row =
      metrics_row(meta.method, bas_dataset_name(ds.ptr), meta.d, meta.m,
                  meta.n_train, meta.seed, &metrics, "ok");
  if (out_path.empty()) {
    std::cout << kResultsHeader << "\n" << row << "\n";
  } else {
    append_results_row(out_path, row,
                       "config_hash=" + meta.config_hash + " version=" +
                           bas_version());
    std::cout << "appended metrics row to " << out_path << "\n";
  }
  return 0;
}

// ---- subcommand: sweep ------------------------------------------------------

struct SweepConfig {
  json document;
  std::string dataset_path;  // resolved CSV path
  std::string dataset_name;
  std::vector<std::string> methods;
  int m = 1;
  std::vector<int> n_train;
  std::vector<std::uint64_t> seeds;
  bas_train_config base_cfg;
};

SweepConfig load_sweep_config(const std::string& path,
                              const std::string& out_dir) {
  json doc = load_json_file(path);
  SweepConfig cfg;
  cfg.document = doc;
  bas_train_config_init(&cfg.base_cfg);
  try {
    const json& dataset = doc.at("dataset");
    if (dataset.contains("path")) {
      cfg.dataset_path = dataset.at("path").get<std::string>();
    } else if (dataset.contains("generate")) {
      const json& g = dataset.at("generate");
      DatasetHandle ds;
      check(bas_dataset_generate_quadratic(
                g.at("d").get<int>(), g.at("m").get<int>(), g.at("n").get<int>(),
                g.value("noise_std", 0.05), g.value("seed", std::uint64_t{0}),
                &ds.ptr),
            "sweep: generate dataset");
      cfg.dataset_path = out_dir + "/dataset.csv";
      check(bas_dataset_save_csv(ds.ptr, cfg.dataset_path.c_str()),
            "sweep: write dataset");
      check(bas_dataset_save_spec(ds.ptr,
                                  (cfg.dataset_path + ".spec.json").c_str()),
            "sweep: write spec");
    } else {
      throw CliError(kExitUsage, "sweep dataset must have 'path' or 'generate'");
    }
    cfg.methods = doc.at("methods").get<std::vector<std::string>>();
    if (cfg.methods.empty()) {
      throw CliError(kExitUsage, "sweep: empty method list");
    }
    for (const std::string& m : cfg.methods) method_from_string(m);
    cfg.m = doc.value("m", 1);
    cfg.n_train = doc.at("n_train").get<std::vector<int>>();
    if (cfg.n_train.empty()) {
      throw CliError(kExitUsage, "sweep: empty n_train list");
    }
    cfg.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) {
      throw CliError(kExitUsage, "sweep: empty seed list");
    }
    apply_shared_knobs(doc, cfg.base_cfg);
  } catch (const json::exception& e) {
    throw CliError(kExitUsage, "malformed sweep config: " + std::string(e.what()));
  }
  return cfg;
}

std::set<std::string> completed_cells(const std::string& results_path) {
  std::set<std::string> done;
  std::ifstream in(results_path);
  if (!in) return done;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("method,", 0) == 0) continue;
    // key = method,dataset,d,m,n_train,seed ; status is the last field
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) fields.push_back(cell);
    if (fields.size() < 11 || fields.back() != "ok") continue;
    done.insert(fields[0] + "," + fields[4] + "," + fields[5]);
  }
  return done;
}

void write_summary(const std::string& results_path,
                   const std::string& summary_path,
                   const std::string& provenance) {
  std::ifstream in(results_path);
  if (!in) return;
  struct CellKey {
    std::string method;
    int n_train;
    bool operator<(const CellKey& o) const {
      return std::tie(method, n_train) < std::tie(o.method, o.n_train);
    }
  };
  std::map<CellKey, std::map<std::string, std::vector<double>>> cells;
  std::string line;
  std::string dataset;
  int d = 0, m = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("method,", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() < 11 || f.back() != "ok") continue;
    dataset = f[1];
    d = std::stoi(f[2]);
    m = std::stoi(f[3]);
    CellKey key{f[0], std::stoi(f[4])};
    cells[key]["r_squared"].push_back(std::stod(f[6]));
    cells[key]["mlppd"].push_back(std::stod(f[7]));
    if (!f[8].empty()) cells[key]["mfsa_rad"].push_back(std::stod(f[8]));
    cells[key]["training_seconds"].push_back(std::stod(f[9]));
  }

  auto quantile = [](std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    double pos = p * (v.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    double frac = pos - lo;
    return v[lo] * (1 - frac) + v[lo + 1] * frac;
  };

  std::ofstream out(summary_path);
  if (!out) throw CliError(kExitRuntime, "cannot write " + summary_path);
  out << "# " << provenance << "\n";
  out << "method,dataset,d,m,n_train,metric,q25,median,q75,count\n";
  for (const auto& [key, metrics] : cells) {
    for (const auto& [metric, values] : metrics) {
      out << key.method << "," << dataset << "," << d << "," << m << ","
          << key.n_train << "," << metric << ","
          << format_double(quantile(values, 0.25)) << ","
          << format_double(quantile(values, 0.5)) << ","
          << format_double(quantile(values, 0.75)) << "," << values.size()
          << "\n";
    }
  }
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              bool fresh) {
  std::filesystem::create_directories(out_dir);
  SweepConfig sweep = load_sweep_config(config_path, out_dir);

  std::string canonical = sweep.document.dump();
  std::string sweep_hash = hash_text(canonical);
  std::string provenance =
      "config_hash=" + sweep_hash + " version=" + bas_version();
  std::string results_path = out_dir + "/results.csv";
  std::string state_path = out_dir + "/sweep.json";

  if (std::filesystem::exists(state_path) && !fresh) {
    json state = load_json_file(state_path);
    if (state.value("config_hash", "") != sweep_hash) {
      throw CliError(kExitUsage,
                     "sweep: output directory holds results of a different "
                     "config (hash mismatch); use --fresh or a new directory");
    }
  } else if (fresh) {
    std::filesystem::remove(results_path);
  }
  {
    std::ofstream state(state_path);
    state << json{{"config_hash", sweep_hash},
                  {"version", bas_version()},
                  {"config", sweep.document}}
                 .dump(2)
          << "\n";
  }

  DatasetHandle ds;
  check(bas_dataset_load_csv(sweep.dataset_path.c_str(), &ds.ptr),
        "sweep: load dataset");
  int d = bas_dataset_dim(ds.ptr);
  std::string dataset_name = bas_dataset_name(ds.ptr);

  std::set<std::string> done = completed_cells(results_path);
  int ran = 0, skipped = 0, failed = 0;
  for (const std::string& method : sweep.methods) {
    for (int n_train : sweep.n_train) {
      for (std::uint64_t seed : sweep.seeds) {
        std::string key = method + "," + std::to_string(n_train) + "," +
                          std::to_string(seed);
        if (done.count(key)) {
          ++skipped;
          continue;
        }
        bas_train_config cfg = sweep.base_cfg;
        cfg.method = method_from_string(method);
        cfg.m = sweep.m;
        cfg.n_train = n_train;
        cfg.seed = seed;

        std::string status = "ok";
        bas_metrics metrics{};
        bool have_metrics = false;
        ModelHandle model;
        if (bas_train(ds.ptr, &cfg, &model.ptr) != BAS_OK) {
          status = std::string("failed:train:") + bas_last_error();
        } else if (bas_evaluate(model.ptr, ds.ptr, -1, &metrics) != BAS_OK) {
          status = std::string("failed:evaluate:") + bas_last_error();
        } else {
          have_metrics = true;
        }
        for (char& c : status) {
          if (c == ',' || c == '\n') c = ';';
        }
        append_results_row(
            results_path,
            metrics_row(method, dataset_name, d, sweep.m, n_train, seed,
                        have_metrics ? &metrics : nullptr, status),
            provenance);
        have_metrics ? ++ran : ++failed;
        std::cout << "cell " << key << ": " << status << "\n";
      }
    }
  }
  write_summary(results_path, out_dir + "/summary.csv", provenance);
  std::cout << "sweep complete: " << ran << " ran, " << skipped
            << " skipped (already done), " << failed << " failed; results in "
            << results_path << "\n";
  return 0;
}

// ---- subcommand: diagnostics (walkthrough) ----------------------------------

int cmd_diagnostics(const std::string& manifest_path,
                    const std::string& out_dir) {
  int32_t completed = 0;
  check(bas_run_walkthrough(manifest_path.c_str(), out_dir.c_str(), &completed),
        "walkthrough");
  std::cout << "walkthrough finished: " << completed
            << " cells completed; artifacts in " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian active-subspace surrogate modeling benchmark"};
  app.require_subcommand(1);
  app.set_version_flag("--version", bas_version());

  // generate
  auto* generate = app.add_subcommand(
      "generate", "Generate a ridge quadratic benchmark dataset");
  int g_d = 10, g_m = 1, g_n = 1000;
  double g_noise = 0.05;
  std::uint64_t g_seed = 0;
  std::string g_out, g_spec;
  generate->add_option("--d", g_d, "input dimension")->required();
  generate->add_option("--m", g_m, "feature-space dimension")->required();
  generate->add_option("--n", g_n, "number of rows")->required();
  generate->add_option("--seed", g_seed, "generator seed");
  generate->add_option("--noise-std", g_noise, "observation noise std");
  generate->add_option("--out", g_out, "output CSV path")->required();
  generate->add_option("--spec-out", g_spec,
                       "spec JSON path (default: <out>.spec.json)");

  // train
  auto* train = app.add_subcommand("train", "Train a surrogate model");
  TrainArgs t;
  bas_train_config_init(&t.cfg);
  train->add_option("--method", t.method, "bas | moas | bgp");
  train->add_option("--data", t.data_path, "dataset CSV");
  train->add_option("--m", t.cfg.m, "feature-space dimension");
  train->add_option("--n-train", t.cfg.n_train, "training rows");
  train->add_option("--seed", t.cfg.seed, "seed");
  train->add_option("--chains", t.cfg.chains, "MCMC chains");
  train->add_option("--draws", t.cfg.draws, "post-warmup draws per chain");
  train->add_option("--warmup", t.cfg.warmup, "warmup draws per chain");
  train->add_option("--target-accept", t.cfg.target_accept, "NUTS target");
  train->add_option("--max-tree-depth", t.cfg.max_tree_depth, "NUTS depth cap");
  train->add_option("--moas-restarts", t.cfg.moas_restarts, "MO-AS restarts");
  train->add_option("--moas-max-iterations", t.cfg.moas_max_iterations,
                    "MO-AS iteration cap");
  train->add_option("--bgp-n-grad", t.cfg.bgp_n_grad,
                    "gradient samples for the B-GP subspace estimator");
  train->add_option("--bgp-thin-draws", t.cfg.bgp_thin_draws,
                    "posterior draws used for B-GP subspace extraction");
  train->add_option("--draws-per-sample", t.cfg.draws_per_sample,
                    "predictive draws per posterior sample");
  train->add_option("--config", t.config_path,
                    "JSON config file (flags override)");
  train->add_option("--out", t.out_path, "output model JSON");
  train->add_option("--diagnostics-out", t.diagnostics_path,
                    "diagnostics JSON (default: <out>.diagnostics.json)");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict at new inputs");
  std::string p_model, p_inputs, p_out;
  predict->add_option("--model", p_model, "model JSON")->required();
  predict->add_option("--inputs", p_inputs, "CSV with x0..x{d-1} columns")
      ->required();
  predict->add_option("--out", p_out, "output CSV")->required();

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "Score a model on a dataset's validation split");
  std::string e_model, e_data, e_out;
  std::int64_t e_split_seed = -1;
  evaluate->add_option("--model", e_model, "model JSON")->required();
  evaluate->add_option("--data", e_data, "dataset CSV")->required();
  evaluate->add_option("--split-seed", e_split_seed,
                       "override split seed (default: model's)");
  evaluate->add_option("--out", e_out, "results CSV to append to");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "Run a methods x n_train x seeds comparative study");
  std::string s_config, s_out_dir = "sweep-results";
  bool s_fresh = false;
  sweep->add_option("--config", s_config, "sweep config JSON")->required();
  sweep->add_option("--out-dir", s_out_dir, "output directory");
  sweep->add_flag("--fresh", s_fresh, "discard existing rows and rerun");

  // diagnostics (walkthrough)
  auto* diagnostics = app.add_subcommand(
      "diagnostics", "Run a walkthrough manifest and emit CSV artifacts");
  std::string w_manifest, w_out_dir = "walkthrough-results";
  diagnostics->add_option("--manifest", w_manifest, "manifest JSON")
      ->required();
  diagnostics->add_option("--out-dir", w_out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (generate->parsed()) {
      return cmd_generate(g_d, g_m, g_n, g_noise, g_seed, g_out, g_spec);
    }
    if (train->parsed()) {
      if (!t.config_path.empty()) {
        // Config file fills every field the user did not pass as a flag.
        bas_train_config file_cfg;
        bas_train_config_init(&file_cfg);
        std::string file_method = t.method;
        std::string file_data, file_out;
        apply_config_json(load_json_file(t.config_path), file_cfg, &file_method,
                          &file_data, &file_out);
        if (!train->count("--method")) t.method = file_method;
        if (t.data_path.empty()) t.data_path = file_data;
        if (t.out_path.empty()) t.out_path = file_out;
        if (!train->count("--m")) t.cfg.m = file_cfg.m;
        if (!train->count("--n-train")) t.cfg.n_train = file_cfg.n_train;
        if (!train->count("--seed")) t.cfg.seed = file_cfg.seed;
        if (!train->count("--chains")) t.cfg.chains = file_cfg.chains;
        if (!train->count("--draws")) t.cfg.draws = file_cfg.draws;
        if (!train->count("--warmup")) t.cfg.warmup = file_cfg.warmup;
        if (!train->count("--target-accept"))
          t.cfg.target_accept = file_cfg.target_accept;
        if (!train->count("--max-tree-depth"))
          t.cfg.max_tree_depth = file_cfg.max_tree_depth;
        if (!train->count("--moas-restarts"))
          t.cfg.moas_restarts = file_cfg.moas_restarts;
        if (!train->count("--moas-max-iterations"))
          t.cfg.moas_max_iterations = file_cfg.moas_max_iterations;
        if (!train->count("--bgp-n-grad"))
          t.cfg.bgp_n_grad = file_cfg.bgp_n_grad;
        if (!train->count("--bgp-thin-draws"))
          t.cfg.bgp_thin_draws = file_cfg.bgp_thin_draws;
        if (!train->count("--draws-per-sample"))
          t.cfg.draws_per_sample = file_cfg.draws_per_sample;
      }
      t.cfg.method = method_from_string(t.method);
      return cmd_train(t);
    }
    if (predict->parsed()) return cmd_predict(p_model, p_inputs, p_out);
    if (evaluate->parsed()) {
      return cmd_evaluate(e_model, e_data, e_split_seed, e_out);
    }
    if (sweep->parsed()) return cmd_sweep(s_config, s_out_dir, s_fresh);
    if (diagnostics->parsed()) return cmd_diagnostics(w_manifest, w_out_dir);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
