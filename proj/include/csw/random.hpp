#pragma once

#include <cstdint>
#include <random>

#include "csw/tensor.hpp"

namespace csw {

// One independent stream of draws. Not thread-safe; give each worker its own.
class Substream {
 public:
  Substream(std::uint64_t master_seed, std::uint64_t index);

  double normal() { return normal_(engine_); }
  std::uint64_t bits() { return engine_(); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Counter-based source: substream(i) depends only on (master_seed, i), so
// draws are reproducible under any parallel schedule.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t master_seed) : seed_(master_seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  Substream substream(std::uint64_t index) const { return Substream(seed_, index); }

 private:
  std::uint64_t seed_;
};

// Seed for an independent repetition; repetition 0 keeps the seed unchanged.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t repetition) noexcept;

// Uniform draw from the unit sphere of R^{c*k*k}, reshaped to c x k x k.
Tensor3 sample_unit_tensor(std::size_t channels, std::size_t k, Substream& rng);

// n supports with iid N(mean, 1) entries; support i uses substream i.
EmpiricalMeasure gaussian_measure(std::size_t n, std::size_t channels, std::size_t dim,
                                  double mean, std::uint64_t seed);

}  // namespace csw
