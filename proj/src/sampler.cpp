#include "bas/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>

#include "bas/error.hpp"
#include "bas/rng.hpp"

namespace bas {

namespace {

constexpr double kMaxEnergyError = 1000.0;  // divergence threshold on dH

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

struct PhasePoint {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  Eigen::VectorXd grad;
  double logp = 0.0;
};

struct Tree {
  PhasePoint backward;  // state at the backward end
  PhasePoint forward;   // state at the forward end
  Eigen::VectorXd q_prop;
  Eigen::VectorXd grad_prop;
  double logp_prop = 0.0;
  double log_sum_weight = -std::numeric_limits<double>::infinity();
  double sum_accept = 0.0;
  int n_leapfrog = 0;
  bool divergent = false;
  bool turning = false;
};

class NutsChain {
 public:
  NutsChain(const ValueGradientFn& value_gradient, int dim,
            const SamplerConfig& cfg, std::uint64_t chain_seed)
      : value_gradient_(value_gradient),
        dim_(dim),
        cfg_(cfg),
        rng_(chain_seed),
        inv_mass_(Eigen::VectorXd::Ones(dim)) {}

  Eigen::MatrixXd run(double& acceptance_rate, int& divergences,
                      int& max_depth_hits, double& final_step) {
    initialize();
    if (cfg_.warmup > 0) {
      run_warmup();
    } else {
      step_ = find_initial_step();
    }

    Eigen::MatrixXd draws(cfg_.draws, dim_);
    double accept_sum = 0.0;
    divergences = 0;
    max_depth_hits = 0;
    for (int t = 0; t < cfg_.draws; ++t) {
      DrawStats stats = transition();
      draws.row(t) = q_.transpose();
      accept_sum += stats.accept_stat;
      if (stats.divergent) ++divergences;
      if (stats.depth_exceeded) ++max_depth_hits;
    }
    acceptance_rate = accept_sum / cfg_.draws;
    final_step = step_;
    return draws;
  }

 private:
  struct DrawStats {
    double accept_stat = 0.0;
    bool divergent = false;
    bool depth_exceeded = false;
  };

  void initialize() {
    grad_.resize(dim_);
    for (int attempt = 0; attempt < 100; ++attempt) {
      q_ = rng_.normal_vector(dim_);
      logp_ = value_gradient_(q_, grad_);
      if (std::isfinite(logp_) && grad_.allFinite()) return;
    }
    throw NumericalError(
        "sampler initialization failed: log density non-finite after 100 "
        "draws from the initial distribution");
  }

  double kinetic(const Eigen::VectorXd& p) const {
    return 0.5 * p.cwiseProduct(inv_mass_).dot(p);
  }

  Eigen::VectorXd sample_momentum() {
    Eigen::VectorXd p(dim_);
    for (int i = 0; i < dim_; ++i) {
      p[i] = rng_.normal() / std::sqrt(inv_mass_[i]);
    }
    return p;
  }

  /// Leapfrog in place; returns the Hamiltonian at the new point.
  double leapfrog(PhasePoint& z, double direction) const {
    double eps = direction * step_;
    z.p += 0.5 * eps * z.grad;
    z.q += eps * inv_mass_.cwiseProduct(z.p);
    z.logp = value_gradient_(z.q, z.grad);
    z.p += 0.5 * eps * z.grad;
    return -z.logp + kinetic(z.p);
  }

  bool is_uturn(const Eigen::VectorXd& q_plus, const Eigen::VectorXd& q_minus,
                const Eigen::VectorXd& p_plus,
                const Eigen::VectorXd& p_minus) const {
    Eigen::VectorXd rho = q_plus - q_minus;
    return rho.dot(inv_mass_.cwiseProduct(p_minus)) < 0.0 ||
           rho.dot(inv_mass_.cwiseProduct(p_plus)) < 0.0;
  }

  Tree build_leaf(PhasePoint z, double direction, double h0) {
    Tree leaf;
    double h = leapfrog(z, direction);
    if (!std::isfinite(h)) h = std::numeric_limits<double>::infinity();
    double log_weight = h0 - h;
    leaf.n_leapfrog = 1;
    leaf.divergent = h - h0 > kMaxEnergyError;
    leaf.sum_accept = std::min(1.0, std::exp(log_weight));
    leaf.log_sum_weight = log_weight;
    leaf.q_prop = z.q;
    leaf.grad_prop = z.grad;
    leaf.logp_prop = z.logp;
    leaf.backward = z;
    leaf.forward = std::move(z);
    return leaf;
  }

  /// Build a subtree of 2^depth leaves extending from `from` in `direction`.
  Tree build_tree(const PhasePoint& from, int depth, double direction,
                  double h0) {
    if (depth == 0) return build_leaf(from, direction, h0);

    Tree first = build_tree(from, depth - 1, direction, h0);
    if (first.divergent || first.turning) return first;

    const PhasePoint& edge = direction > 0 ? first.forward : first.backward;
    Tree second = build_tree(edge, depth - 1, direction, h0);

    Tree combined;
    combined.n_leapfrog = first.n_leapfrog + second.n_leapfrog;
    combined.sum_accept = first.sum_accept + second.sum_accept;
    combined.divergent = second.divergent;
    combined.turning = second.turning;
    combined.log_sum_weight =
        log_add_exp(first.log_sum_weight, second.log_sum_weight);
    // Multinomial sampling between the two halves.
    if (std::log(rng_.uniform()) <
        second.log_sum_weight - combined.log_sum_weight) {
      combined.q_prop = second.q_prop;
      combined.grad_prop = second.grad_prop;
      combined.logp_prop = second.logp_prop;
    } else {
      combined.q_prop = first.q_prop;
      combined.grad_prop = first.grad_prop;
      combined.logp_prop = first.logp_prop;
    }
    if (direction > 0) {
      combined.backward = first.backward;
      combined.forward = second.forward;
    } else {
      combined.backward = second.backward;
      combined.forward = first.forward;
    }
    if (!combined.divergent && !combined.turning) {
      combined.turning = is_uturn(combined.forward.q, combined.backward.q,
                                  combined.forward.p, combined.backward.p);
    }
    return combined;
  }

  DrawStats transition() {
    PhasePoint z{q_, sample_momentum(), grad_, logp_};
    double h0 = -z.logp + kinetic(z.p);

    PhasePoint backward = z;
    PhasePoint forward = z;
    Eigen::VectorXd q_prop = z.q;
    Eigen::VectorXd grad_prop = z.grad;
    double logp_prop = z.logp;
    double log_sum_weight = 0.0;  // the initial point carries weight 1
    double sum_accept = 0.0;
    int n_leapfrog = 0;

    DrawStats stats;
    int depth = 0;
    while (depth < cfg_.max_tree_depth) {
      double direction = rng_.uniform() < 0.5 ? -1.0 : 1.0;
      Tree subtree = build_tree(direction > 0 ? forward : backward, depth,
                                direction, h0);
      sum_accept += subtree.sum_accept;
      n_leapfrog += subtree.n_leapfrog;
      if (subtree.divergent) {
        stats.divergent = true;
        break;
      }
      if (subtree.turning) break;

      // Biased progressive sampling toward the fresh half of the trajectory.
      if (std::log(rng_.uniform()) <
          subtree.log_sum_weight - log_sum_weight) {
        q_prop = subtree.q_prop;
        grad_prop = subtree.grad_prop;
        logp_prop = subtree.logp_prop;
      }
      log_sum_weight = log_add_exp(log_sum_weight, subtree.log_sum_weight);
      if (direction > 0) {
        forward = subtree.forward;
      } else {
        backward = subtree.backward;
      }
      ++depth;
      if (is_uturn(forward.q, backward.q, forward.p, backward.p)) break;
    }
    stats.depth_exceeded = depth == cfg_.max_tree_depth;
    stats.accept_stat = n_leapfrog > 0 ? sum_accept / n_leapfrog : 0.0;

    q_ = std::move(q_prop);
    grad_ = std::move(grad_prop);
    logp_ = logp_prop;
    return stats;
  }

  /// Standard doubling/halving search for a step size whose one-step
  /// acceptance crosses 1/2.
  double find_initial_step() {
    double eps = 1.0;
    Eigen::VectorXd p0 = sample_momentum();
    auto probe = [&](double step) {
      PhasePoint z{q_, p0, grad_, logp_};
      double h0 = -z.logp + kinetic(z.p);
      double saved = step_;
      step_ = step;
      double h = leapfrog(z, 1.0);
      step_ = saved;
      return h0 - h;  // log acceptance
    };
    double log_a = probe(eps);
    int guard = 0;
    while (!std::isfinite(log_a) && guard++ < 100) {
      eps *= 0.5;
      log_a = probe(eps);
    }
    if (!std::isfinite(log_a)) {
      throw NumericalError("step-size search failed: non-finite energies");
    }
    double dir = log_a > std::log(0.5) ? 1.0 : -1.0;
    for (int i = 0; i < 100; ++i) {
      if (dir * log_a <= dir * std::log(0.5)) break;
      eps *= std::pow(2.0, dir);
      if (eps < 1e-10 || eps > 1e7) break;
      log_a = probe(eps);
      if (!std::isfinite(log_a)) {
        if (dir > 0) break;
        continue;
      }
    }
    return std::clamp(eps, 1e-10, 1e7);
  }

  struct DualAveraging {
    double mu = 0.0;
    double log_eps_bar = 0.0;
    double h_bar = 0.0;
    int m = 1;
    static constexpr double kGamma = 0.05;
    static constexpr double kT0 = 10.0;
    static constexpr double kKappa = 0.75;

    void restart(double eps) {
      mu = std::log(10.0 * eps);
      log_eps_bar = std::log(eps);
      h_bar = 0.0;
      m = 1;
    }
    double update(double accept_stat, double target) {
      double w = 1.0 / (m + kT0);
      h_bar = (1.0 - w) * h_bar + w * (target - accept_stat);
      double log_eps = mu - std::sqrt(static_cast<double>(m)) / kGamma * h_bar;
      double eta = std::pow(static_cast<double>(m), -kKappa);
      log_eps_bar = eta * log_eps + (1.0 - eta) * log_eps_bar;
      ++m;
      return std::exp(log_eps);
    }
    double averaged() const { return std::exp(log_eps_bar); }
  };

  void run_warmup() {
    // Stan-style schedule: a fast initial buffer adapting only the step
    // size, expanding slow windows estimating the diagonal mass matrix, and
    // a fast terminal buffer.
    const int total = cfg_.warmup;
    int init_buffer = 75;
    int term_buffer = 50;
    int base_window = 25;
    bool adapt_mass = total >= init_buffer + term_buffer + base_window;
    if (!adapt_mass) {
      init_buffer = total;
      term_buffer = 0;
    }

    step_ = find_initial_step();
    DualAveraging da;
    da.restart(step_);

    std::vector<int> window_ends;
    if (adapt_mass) {
      int start = init_buffer;
      int size = base_window;
      while (true) {
        int end = start + size;
        if (end + 2 * size + term_buffer > total) {
          end = total - term_buffer;
          window_ends.push_back(end);
          break;
        }
        window_ends.push_back(end);
        start = end;
        size *= 2;
      }
    }

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(dim_);
    int count = 0;
    size_t window = 0;

    for (int t = 0; t < total; ++t) {
      DrawStats stats = transition();
      step_ = da.update(stats.accept_stat, cfg_.target_accept);

      bool in_slow = adapt_mass && t >= init_buffer &&
                     window < window_ends.size() && t < window_ends.back();
      if (in_slow) {
        sum += q_;
        sum_sq += q_.cwiseAbs2();
        ++count;
        if (t + 1 == window_ends[window]) {
          Eigen::VectorXd mean = sum / count;
          Eigen::VectorXd var =
              (sum_sq / count - mean.cwiseAbs2()).cwiseMax(1e-12);
          double shrink = static_cast<double>(count) / (count + 5.0);
          inv_mass_ = shrink * var.array() + 1e-3 * (1.0 - shrink);
          sum.setZero();
          sum_sq.setZero();
          count = 0;
          ++window;
          step_ = find_initial_step();
          da.restart(step_);
        }
      }
    }
    step_ = da.averaged();
  }

  const ValueGradientFn& value_gradient_;
  int dim_;
  SamplerConfig cfg_;
  Rng rng_;
  Eigen::VectorXd inv_mass_;
  double step_ = 1.0;

  Eigen::VectorXd q_;
  Eigen::VectorXd grad_;
  double logp_ = 0.0;
};

}  // namespace

void SamplerConfig::validate() const {
  if (chains < 1 || draws < 1 || warmup < 0) {
    throw InvalidArgumentError("sampler config: chains/draws/warmup out of range");
  }
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw InvalidArgumentError("sampler config: target_accept must be in (0,1)");
  }
  if (max_tree_depth < 1) {
    throw InvalidArgumentError("sampler config: max_tree_depth must be >= 1");
  }
}

void leapfrog_step(Eigen::VectorXd& q, Eigen::VectorXd& p,
                   Eigen::VectorXd& grad, const GradientFn& gradient,
                   double step, const Eigen::VectorXd& inv_mass) {
  p += 0.5 * step * grad;
  q += step * inv_mass.cwiseProduct(p);
  grad = gradient(q);
  p += 0.5 * step * grad;
}

SampleResult nuts_sample(const LogDensityFn& logdensity,
                         const GradientFn& gradient, int dim,
                         const SamplerConfig& cfg) {
  ValueGradientFn combined = [&logdensity, &gradient](const Eigen::VectorXd& q,
                                                      Eigen::VectorXd& grad) {
    grad = gradient(q);
    return logdensity(q);
  };
  return nuts_sample(combined, dim, cfg);
}

SampleResult nuts_sample(const ValueGradientFn& value_gradient, int dim,
                         const SamplerConfig& cfg) {
  cfg.validate();
  if (dim < 1) throw InvalidArgumentError("nuts_sample: dim must be >= 1");

  SampleResult result;
  result.chains.resize(cfg.chains);
  result.diagnostics.acceptance_rate.resize(cfg.chains);
  result.diagnostics.divergence_count.resize(cfg.chains);
  result.diagnostics.max_depth_count.resize(cfg.chains);
  result.diagnostics.step_size.resize(cfg.chains);

  auto run_chain = [&](int c) {
    NutsChain chain(value_gradient, dim, cfg, Rng::derive(cfg.seed, c));
    result.chains[c] = chain.run(result.diagnostics.acceptance_rate[c],
                                 result.diagnostics.divergence_count[c],
                                 result.diagnostics.max_depth_count[c],
                                 result.diagnostics.step_size[c]);
  };

  std::vector<std::future<void>> futures;
  futures.reserve(cfg.chains);
  for (int c = 0; c < cfg.chains; ++c) {
    futures.push_back(std::async(std::launch::async, run_chain, c));
  }
  for (auto& f : futures) f.get();

  result.diagnostics.split_rhat.resize(dim);
  const int even_draws = cfg.draws - cfg.draws % 2;
  for (int j = 0; j < dim; ++j) {
    std::vector<Eigen::VectorXd> param_chains;
    param_chains.reserve(cfg.chains);
    for (int c = 0; c < cfg.chains; ++c) {
      param_chains.push_back(result.chains[c].col(j).head(even_draws));
    }
    result.diagnostics.split_rhat[j] =
        cfg.chains >= 2 && even_draws >= 4 ? split_rhat(param_chains) : 1.0;
  }
  return result;
}

double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.size() < 2) {
    throw InvalidArgumentError("split_rhat: needs at least 2 chains");
  }
  const Eigen::Index len = chains.front().size();
  if (len < 4 || len % 2 != 0) {
    throw InvalidArgumentError("split_rhat: needs an even draw count >= 4");
  }
  for (const auto& c : chains) {
    if (c.size() != len) {
      throw InvalidArgumentError("split_rhat: chains have unequal lengths");
    }
  }

  const Eigen::Index half = len / 2;
  std::vector<Eigen::VectorXd> halves;
  halves.reserve(2 * chains.size());
  for (const auto& c : chains) {
    halves.push_back(c.head(half));
    halves.push_back(c.tail(half));
  }

  const double n = static_cast<double>(half);
  const double m = static_cast<double>(halves.size());
  Eigen::VectorXd means(halves.size());
  Eigen::VectorXd vars(halves.size());
  for (size_t i = 0; i < halves.size(); ++i) {
    means[i] = halves[i].mean();
    vars[i] = (halves[i].array() - means[i]).square().sum() / (n - 1.0);
  }
  double within = vars.mean();
  double grand = means.mean();
  double between = n * (means.array() - grand).square().sum() / (m - 1.0);

  if (within == 0.0) {
    bool equal_means = (means.array() == means[0]).all();
    if (equal_means) return 1.0;
    return std::numeric_limits<double>::infinity();
  }
  double var_plus = (n - 1.0) / n * within + between / n;
  return std::sqrt(var_plus / within);
}

}  // namespace bas
