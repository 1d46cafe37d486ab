#include "csw/random.hpp"

#include <cmath>

#include "csw/error.hpp"

namespace csw {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Substream::Substream(std::uint64_t master_seed, std::uint64_t index)
    : engine_(make_engine(master_seed, index)) {}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t repetition) noexcept {
  if (repetition == 0) return seed;
  return splitmix64(seed ^ splitmix64(repetition));
}

Tensor3 sample_unit_tensor(std::size_t channels, std::size_t k, Substream& rng) {
  require(channels >= 1 && k >= 1, ErrorCode::invalid_shape,
          "unit tensor shape must be positive");
  Tensor3 t(channels, k);
  auto v = t.values();
  for (;;) {
    double sq = 0.0;
    for (double& x : v) {
      x = rng.normal();
      sq += x * x;
    }
    // An all-zero draw has probability zero; redraw rather than divide by it.
    if (sq > 0.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (double& x : v) x *= inv;
      return t;
    }
  }
}

EmpiricalMeasure gaussian_measure(std::size_t n, std::size_t channels, std::size_t dim,
                                  double mean, std::uint64_t seed) {
  require(n >= 1, ErrorCode::invalid_argument, "measure needs at least one support");
  const RandomSource rng(seed);
  std::vector<Tensor3> supports;
  supports.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto sub = rng.substream(i);
    Tensor3 t(channels, dim);
    for (double& v : t.values()) v = mean + sub.normal();
    supports.push_back(std::move(t));
  }
  return EmpiricalMeasure(std::move(supports));
}

}  // namespace csw
