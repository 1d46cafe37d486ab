#include "csw/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "csw/error.hpp"

namespace csw {

namespace {

void check_order(double p) {
  require(std::isfinite(p) && p >= 1.0, ErrorCode::invalid_argument,
          "Wasserstein order p must be >= 1");
}

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::stable_sort(s.begin(), s.end());
  return s;
}

struct SortedWeighted {
  std::vector<double> values;
  std::vector<double> cumulative;
};

SortedWeighted sort_weighted(const Empirical1D& m) {
  std::vector<std::size_t> order(m.values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return m.values[a] < m.values[b]; });
  SortedWeighted s;
  double acc = 0.0;
  for (std::size_t i : order) {
    s.values.push_back(m.values[i]);
    acc += m.weights[i];
    s.cumulative.push_back(acc);
  }
  // Weights sum to one within tolerance; pin the last breakpoint exactly.
  s.cumulative.back() = 1.0;
  return s;
}

}  // namespace

double pow_abs(double t, double p) noexcept {
  t = std::fabs(t);
  if (p == 1.0) return t;
  if (p == 2.0) return t * t;
  if (p == std::floor(p) && p <= 16.0) {
    double r = t;
    for (int i = 1; i < static_cast<int>(p); ++i) r *= t;
    return r;
  }
  return std::pow(t, p);
}

Empirical1D Empirical1D::uniform(std::vector<double> values) {
  const std::size_t n = values.size();
  Empirical1D m{std::move(values), {}};
  if (n > 0) m.weights.assign(n, 1.0 / static_cast<double>(n));
  return m;
}

void validate(const Empirical1D& m) {
  require(!m.values.empty(), ErrorCode::invalid_argument, "1D measure is empty");
  require(m.values.size() == m.weights.size(), ErrorCode::invalid_argument,
          "1D measure values and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    require(std::isfinite(m.values[i]), ErrorCode::invalid_argument, "non-finite 1D value");
    require(m.weights[i] > 0.0, ErrorCode::invalid_argument, "1D weights must be positive");
    total += m.weights[i];
  }
  require(std::fabs(total - 1.0) <= 1e-12, ErrorCode::invalid_argument,
          "1D weights must sum to 1");
}

double wasserstein1d_equal_sorted_pow(std::span<const double> xs_sorted,
                                      std::span<const double> ys_sorted, double p) {
  const std::size_t n = xs_sorted.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += pow_abs(xs_sorted[i] - ys_sorted[i], p);
  return acc / static_cast<double>(n);
}

double wasserstein1d_equal_pow(std::span<const double> xs, std::span<const double> ys, double p) {
  check_order(p);
  require(xs.size() == ys.size(), ErrorCode::invalid_argument,
          "equal-size 1D Wasserstein needs equal lengths, got " + std::to_string(xs.size()) +
              " and " + std::to_string(ys.size()));
  require(!xs.empty(), ErrorCode::invalid_argument, "1D samples are empty");
  const auto a = sorted_copy(xs);
  const auto b = sorted_copy(ys);
  return wasserstein1d_equal_sorted_pow(a, b, p);
}

double wasserstein1d_equal(std::span<const double> xs, std::span<const double> ys, double p) {
  return std::pow(wasserstein1d_equal_pow(xs, ys, p), 1.0 / p);
}

double wasserstein1d_general_pow(const Empirical1D& mu, const Empirical1D& nu, double p) {
  check_order(p);
  validate(mu);
  validate(nu);
  const auto a = sort_weighted(mu);
  const auto b = sort_weighted(nu);
  // Both quantile functions are step functions; integrate |Fa^-1 - Fb^-1|^p
  // over the merged breakpoints.
  double acc = 0.0;
  double z = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.values.size() && j < b.values.size()) {
    const double next = std::min(a.cumulative[i], b.cumulative[j]);
    if (next > z) acc += (next - z) * pow_abs(a.values[i] - b.values[j], p);
    z = next;
    if (a.cumulative[i] <= z) ++i;
    if (b.cumulative[j] <= z) ++j;
  }
  return acc;
}

double wasserstein1d_general(const Empirical1D& mu, const Empirical1D& nu, double p) {
  return std::pow(wasserstein1d_general_pow(mu, nu, p), 1.0 / p);
}

void validate(const PointCloud& cloud) {
  require(cloud.n >= 1 && cloud.k >= 1, ErrorCode::invalid_argument, "point cloud is empty");
  require(cloud.coords.size() == cloud.n * cloud.k, ErrorCode::invalid_shape,
          "point cloud coordinate count mismatch");
  for (double v : cloud.coords) {
    require(std::isfinite(v), ErrorCode::invalid_argument, "non-finite point coordinate");
  }
}

Assignment solve_assignment(std::span<const double> cost, std::size_t n) {
  require(n >= 1 && cost.size() == n * n, ErrorCode::invalid_shape,
          "assignment cost matrix must be n x n");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-indexed potentials; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment result;
  result.match.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) result.match[row_of[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) result.cost += cost[i * n + result.match[i]];
  return result;
}

double ground_cost(std::span<const double> x, std::span<const double> y, double p) noexcept {
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = x[i] - y[i];
    sq += t * t;
  }
  if (p == 2.0) return sq;
  return pow_abs(std::sqrt(sq), p);
}

Assignment exact_wasserstein_plan(const PointCloud& x, const PointCloud& y, double p) {
  check_order(p);
  validate(x);
  validate(y);
  require(x.n == y.n, ErrorCode::invalid_argument, "exact Wasserstein needs equal sizes");
  require(x.k == y.k, ErrorCode::invalid_shape, "point clouds live in different dimensions");
  require(x.n <= kMaxAssignmentSize, ErrorCode::capacity,
          "assignment solver accepts at most " + std::to_string(kMaxAssignmentSize) +
              " points, got " + std::to_string(x.n));
  const std::size_t n = x.n;
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = ground_cost(x.point(i), y.point(j), p);
  }
  auto plan = solve_assignment(cost, n);
  plan.cost /= static_cast<double>(n);
  return plan;
}

double exact_wasserstein_assignment(const PointCloud& x, const PointCloud& y, double p) {
  return std::pow(exact_wasserstein_plan(x, y, p).cost, 1.0 / p);
}

}  // namespace csw
