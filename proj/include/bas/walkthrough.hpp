#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bas/data.hpp"
#include "bas/sampler.hpp"

namespace bas {

struct WalkthroughCell {
  int m = 1;
  int n_train = 0;
};

struct QuadraticGenSpec {
  int d = 50;
  int m = 1;
  int n = 1000;
  double noise_std = 0.05;
  std::uint64_t seed = 0;
};

/// A scripted study: train the fully Bayesian model over a grid of
/// (feature-space dimension, training size) cells against one dataset and
/// emit per-cell CSV artifacts (chains, prior-vs-posterior histograms,
/// actual-vs-predicted tables, split-R^ tables).
struct WalkthroughManifest {
  std::string dataset_path;                  // used when non-empty
  std::optional<QuadraticGenSpec> generate;  // used otherwise
  std::vector<WalkthroughCell> cells;
  SamplerConfig sampler;
  std::uint64_t seed = 0;
  int tracked_projection_params = 5;
  int histogram_bins = 40;
  int draws_per_sample = 10;
};

WalkthroughManifest load_walkthrough_manifest(const std::string& path);

/// Runs every cell, writing one artifact directory per cell under out_dir.
/// A failing cell leaves an error.txt in its directory and does not abort
/// the remaining cells. Returns the number of cells that completed.
int run_walkthrough(const WalkthroughManifest& manifest,
                    const std::string& out_dir);

}  // namespace bas
