#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace csw {

// |t|^p with exact arithmetic for integer p.
double pow_abs(double t, double p) noexcept;

// Weighted 1D measure; weights default to uniform.
struct Empirical1D {
  std::vector<double> values;
  std::vector<double> weights;

  static Empirical1D uniform(std::vector<double> values);
};

void validate(const Empirical1D& m);

// W_p^p between two equal-size uniform 1D samples, given already sorted.
double wasserstein1d_equal_sorted_pow(std::span<const double> xs_sorted,
                                      std::span<const double> ys_sorted, double p);

// W_p between two equal-size uniform samples (sort, pair by rank).
double wasserstein1d_equal(std::span<const double> xs, std::span<const double> ys, double p);
double wasserstein1d_equal_pow(std::span<const double> xs, std::span<const double> ys, double p);

// W_p via the quantile integral over merged CDF breakpoints.
double wasserstein1d_general(const Empirical1D& mu, const Empirical1D& nu, double p);
double wasserstein1d_general_pow(const Empirical1D& mu, const Empirical1D& nu, double p);

// Row-major n x k point cloud with uniform weights.
struct PointCloud {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> coords;

  std::span<const double> point(std::size_t i) const { return {coords.data() + i * k, k}; }
};

void validate(const PointCloud& cloud);

struct Assignment {
  std::vector<std::size_t> match;  // match[i] = column assigned to row i
  double cost = 0.0;
};

// Minimum-cost perfect matching on a square row-major cost matrix
// (shortest augmenting path with potentials, O(n^3)).
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

// Ground cost ||x - y||_2^p.
double ground_cost(std::span<const double> x, std::span<const double> y, double p) noexcept;

// Largest instance accepted by the assignment-backed routines.
inline constexpr std::size_t kMaxAssignmentSize = 512;

// Exact W_p^p between equal-size uniform clouds in R^k, and its matching.
Assignment exact_wasserstein_plan(const PointCloud& x, const PointCloud& y, double p);
double exact_wasserstein_assignment(const PointCloud& x, const PointCloud& y, double p);

}  // namespace csw
