#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace bas {

/// splitmix64 step; used to derive independent stream seeds from a master
/// seed so that chains / restarts / prediction draws stay reproducible
/// regardless of execution order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic RNG with an explicit normal implementation (Box-Muller on
/// top of mt19937_64) so draws do not depend on the standard library's
/// distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Combine a master seed with a stream index into a fresh seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0x5851f42d4c957f2dULL * (stream + 1));
    return splitmix64(s);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  /// Uniform integer in [0, bound).
  std::uint64_t integer(std::uint64_t bound) { return engine_() % bound; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bas
