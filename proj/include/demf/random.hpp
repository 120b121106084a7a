#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace demf {

/// Counter-based generator: the k-th 64-bit output is a SplitMix64 finaliser
/// applied to seed + k * golden-ratio increment. Output depends only on (seed, k),
/// so streams are reproducible across platforms and compilers.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index n);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace demf
