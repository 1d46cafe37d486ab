#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "csw/random.hpp"
#include "csw/slicer.hpp"
#include "csw/tensor.hpp"

namespace csw {

enum class Family { sw, csw, max_sw, max_csw, prw, cprw, exact };

struct MethodSpec {
  Family family = Family::csw;
  SlicerVariant variant = SlicerVariant::stride;
  bool nonlinear = false;
  double p = 2.0;
  std::size_t L = 100;
  std::size_t k = 2;
  std::size_t steps = 100;
  double learning_rate = 0.01;
  std::uint64_t seed = 42;
  // Lets Monte Carlo methods compare measures with different support counts
  // through the general-weight 1D solver.
  bool allow_unequal = false;
};

// Accepts sw, csw-{b,s,d,full}, ncsw-{b,s,d}, max-sw, max-csw-{b,s,d},
// prw, cprw-{b,s,d} and exact. Other fields keep their defaults.
MethodSpec parse_method(std::string_view name);
std::string method_name(const MethodSpec& spec);
void validate(const MethodSpec& spec);

bool is_monte_carlo(Family f) noexcept;
bool is_ascent(Family f) noexcept;
bool uses_assignment(Family f) noexcept;

// Stored reals per projection (direction, frame, or kernel stack).
std::uint64_t projection_param_count(const MethodSpec& spec, std::size_t channels, std::size_t dim);
// Multiply-accumulates to project one support once.
std::uint64_t projection_mac_count(const MethodSpec& spec, std::size_t channels, std::size_t dim);

// Dot product of every support with a direction of the same shape.
std::vector<double> project_direction(const Tensor3& direction, const EmpiricalMeasure& measure);

// W_p^p between two 1D samples: sorted pairing for equal sizes, the quantile
// integral otherwise.
double sliced_cost_pow(std::vector<double> xs, std::vector<double> ys, double p);

// Per-projection W_p^p for L independent directions / kernel stacks.
// Projection l draws from rng.substream(l).
std::vector<double> sw_slices(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p,
                              std::size_t L, const RandomSource& rng, unsigned threads = 0,
                              bool allow_unequal = false);
std::vector<double> csw_slices(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                               SlicerVariant variant, bool nonlinear, double p, std::size_t L,
                               const RandomSource& rng, unsigned threads = 0,
                               bool allow_unequal = false);

// ((1/L) sum_l slices[l])^(1/p), summed in index order.
double reduce_slices(const std::vector<double>& slices, double p);

double sw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p, std::size_t L,
          const RandomSource& rng, unsigned threads = 0);
double csw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, SlicerVariant variant,
           bool nonlinear, double p, std::size_t L, const RandomSource& rng,
           unsigned threads = 0);

// Projected gradient ascent on W_p^p. `value` is the best W_p seen;
// `best` and `iterates` hold W_p after each of the steps + 1 evaluations.
struct AscentResult {
  double value = 0.0;
  std::vector<double> best;
  std::vector<double> iterates;
};

AscentResult max_sw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p,
                    std::size_t steps, double learning_rate, const RandomSource& rng);
AscentResult max_csw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     SlicerVariant variant, double p, std::size_t steps, double learning_rate,
                     const RandomSource& rng, bool nonlinear = false);
AscentResult prw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::size_t k, double p,
                 std::size_t steps, double learning_rate, const RandomSource& rng);
AscentResult cprw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, SlicerVariant variant,
                  std::size_t k, double p, std::size_t steps, double learning_rate,
                  const RandomSource& rng);

// Exact W_p between the vectorized supports (assignment oracle).
double exact_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p);

// Dispatches on spec.family.
double distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const MethodSpec& spec,
                unsigned threads = 0);

}  // namespace csw
