#include "csw/distances.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "csw/error.hpp"
#include "csw/ot.hpp"
#include "csw/parallel.hpp"

namespace csw {

namespace {

struct NamedMethod {
  std::string_view name;
  Family family;
  SlicerVariant variant;
  bool nonlinear;
};

constexpr NamedMethod kMethods[] = {
    {"sw", Family::sw, SlicerVariant::full, false},
    {"csw-b", Family::csw, SlicerVariant::base, false},
    {"csw-s", Family::csw, SlicerVariant::stride, false},
    {"csw-d", Family::csw, SlicerVariant::dilation, false},
    {"csw-full", Family::csw, SlicerVariant::full, false},
    {"ncsw-b", Family::csw, SlicerVariant::base, true},
    {"ncsw-s", Family::csw, SlicerVariant::stride, true},
    {"ncsw-d", Family::csw, SlicerVariant::dilation, true},
    {"max-sw", Family::max_sw, SlicerVariant::full, false},
    {"max-csw-b", Family::max_csw, SlicerVariant::base, false},
    {"max-csw-s", Family::max_csw, SlicerVariant::stride, false},
    {"max-csw-d", Family::max_csw, SlicerVariant::dilation, false},
    {"prw", Family::prw, SlicerVariant::full, false},
    {"cprw-b", Family::cprw, SlicerVariant::base, false},
    {"cprw-s", Family::cprw, SlicerVariant::stride, false},
    {"cprw-d", Family::cprw, SlicerVariant::dilation, false},
    {"exact", Family::exact, SlicerVariant::full, false},
};

void check_pair(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, bool allow_unequal) {
  require(mu.same_shape(nu), ErrorCode::invalid_shape, "measures have different support shapes");
  require(allow_unequal || mu.size() == nu.size(), ErrorCode::invalid_argument,
          "measures must have equal support counts (" + std::to_string(mu.size()) + " vs " +
              std::to_string(nu.size()) + ")");
}

void check_p(double p) {
  require(std::isfinite(p) && p >= 1.0, ErrorCode::invalid_argument, "p must be >= 1");
}

void check_ascent(std::size_t steps, double lr) {
  require(steps >= 1, ErrorCode::invalid_argument, "steps must be >= 1");
  require(std::isfinite(lr) && lr > 0.0, ErrorCode::invalid_argument,
          "learning rate must be positive");
}

// Sorting permutation with ties broken by support index.
std::vector<std::size_t> argsort(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  return idx;
}

// d |t|^p / dt
double pow_abs_derivative(double t, double p) noexcept {
  if (t == 0.0) return 0.0;
  const double sign = t > 0.0 ? 1.0 : -1.0;
  if (p == 1.0) return sign;
  if (p == 2.0) return 2.0 * t;
  return p * pow_abs(t, p - 1.0) * sign;
}

double root(double wpp, double p) { return std::pow(std::max(wpp, 0.0), 1.0 / p); }

struct Tracker {
  AscentResult result;
  double best_pow = -1.0;

  void record(double wpp, double p) {
    best_pow = std::max(best_pow, wpp);
    result.iterates.push_back(root(wpp, p));
    result.best.push_back(root(best_pow, p));
    result.value = result.best.back();
  }
};

void normalize_in_place(std::span<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq <= 0.0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

Eigen::MatrixXd as_matrix(const EmpiricalMeasure& m) {
  Eigen::MatrixXd out(m.size(), m.support_length());
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto v = m[i].values();
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = v[j];
  }
  return out;
}

// Orthonormal factor of a thin QR with R's diagonal made positive.
Eigen::MatrixXd stiefel_retract(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

PointCloud to_cloud(std::vector<double> coords, std::size_t n, std::size_t k) {
  return PointCloud{n, k, std::move(coords)};
}

void check_assignment_size(std::size_t n) {
  require(n <= kMaxAssignmentSize, ErrorCode::capacity,
          "assignment-backed methods accept at most " + std::to_string(kMaxAssignmentSize) +
              " supports per measure, got " + std::to_string(n));
}

}  // namespace

std::vector<double> project_direction(const Tensor3& direction, const EmpiricalMeasure& measure) {
  require(direction.same_shape(measure[0]), ErrorCode::invalid_shape,
          "direction and supports differ in shape");
  auto dir = direction.values();
  std::vector<double> v;
  v.reserve(measure.size());
  for (const auto& x : measure.supports()) {
    auto xv = x.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i] * dir[i];
    v.push_back(acc);
  }
  return v;
}

double sliced_cost_pow(std::vector<double> xs, std::vector<double> ys, double p) {
  if (xs.size() == ys.size()) {
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    return wasserstein1d_equal_sorted_pow(xs, ys, p);
  }
  return wasserstein1d_general_pow(Empirical1D::uniform(std::move(xs)),
                                   Empirical1D::uniform(std::move(ys)), p);
}

MethodSpec parse_method(std::string_view name) {
  for (const auto& m : kMethods) {
    if (m.name == name) {
      MethodSpec spec;
      spec.family = m.family;
      spec.variant = m.variant;
      spec.nonlinear = m.nonlinear;
      return spec;
    }
  }
  fail(ErrorCode::invalid_argument, "unknown method '" + std::string(name) + "'");
}

std::string method_name(const MethodSpec& spec) {
  for (const auto& m : kMethods) {
    const bool variant_matters = spec.family == Family::csw || spec.family == Family::max_csw ||
                                 spec.family == Family::cprw;
    if (m.family == spec.family && (!variant_matters || m.variant == spec.variant) &&
        (spec.family != Family::csw || m.nonlinear == spec.nonlinear)) {
      return std::string(m.name);
    }
  }
  return "unknown";
}

bool is_monte_carlo(Family f) noexcept { return f == Family::sw || f == Family::csw; }
bool is_ascent(Family f) noexcept {
  return f == Family::max_sw || f == Family::max_csw || f == Family::prw || f == Family::cprw;
}
bool uses_assignment(Family f) noexcept {
  return f == Family::prw || f == Family::cprw || f == Family::exact;
}

void validate(const MethodSpec& spec) {
  check_p(spec.p);
  if (is_monte_carlo(spec.family)) {
    require(spec.L >= 1, ErrorCode::invalid_argument, "L must be >= 1");
  }
  if (is_ascent(spec.family)) check_ascent(spec.steps, spec.learning_rate);
  require(spec.k >= 1, ErrorCode::invalid_argument, "k must be >= 1");
}

std::uint64_t projection_param_count(const MethodSpec& spec, std::size_t channels,
                                     std::size_t dim) {
  const std::uint64_t flat = std::uint64_t{channels} * dim * dim;
  switch (spec.family) {
    case Family::sw:
    case Family::max_sw: return flat;
    case Family::prw: return flat * spec.k;
    case Family::csw:
    case Family::max_csw:
      return param_count(*cached_schedule(spec.variant, channels, dim, 1, spec.nonlinear));
    case Family::cprw:
      return param_count(*cached_schedule(spec.variant, channels, dim, spec.k, false));
    case Family::exact: return 0;
  }
  return 0;
}

std::uint64_t projection_mac_count(const MethodSpec& spec, std::size_t channels,
                                   std::size_t dim) {
  const std::uint64_t flat = std::uint64_t{channels} * dim * dim;
  switch (spec.family) {
    case Family::sw:
    case Family::max_sw: return flat;
    case Family::prw: return flat * spec.k;
    case Family::csw:
    case Family::max_csw:
      return slicer_mac_count(*cached_schedule(spec.variant, channels, dim, 1, spec.nonlinear));
    case Family::cprw:
      return slicer_mac_count(*cached_schedule(spec.variant, channels, dim, spec.k, false));
    case Family::exact: return 0;
  }
  return 0;
}

std::vector<double> sw_slices(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p,
                              std::size_t L, const RandomSource& rng, unsigned threads,
                              bool allow_unequal) {
  check_p(p);
  require(L >= 1, ErrorCode::invalid_argument, "L must be >= 1");
  check_pair(mu, nu, allow_unequal);
  std::vector<double> out(L);
  parallel_for(L, threads, [&](std::size_t l) {
    auto sub = rng.substream(l);
    const Tensor3 theta = sample_unit_tensor(mu.channels(), mu.dim(), sub);
    out[l] = sliced_cost_pow(project_direction(theta, mu), project_direction(theta, nu), p);
  });
  return out;
}

std::vector<double> csw_slices(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                               SlicerVariant variant, bool nonlinear, double p, std::size_t L,
                               const RandomSource& rng, unsigned threads, bool allow_unequal) {
  check_p(p);
  require(L >= 1, ErrorCode::invalid_argument, "L must be >= 1");
  check_pair(mu, nu, allow_unequal);
  auto schedule = cached_schedule(variant, mu.channels(), mu.dim(), 1, nonlinear);
  std::vector<double> out(L);
  parallel_for(L, threads, [&](std::size_t l) {
    auto sub = rng.substream(l);
    const KernelStack stack = sample_kernel_stack(schedule, sub);
    out[l] = sliced_cost_pow(project(stack, mu), project(stack, nu), p);
  });
  return out;
}

double reduce_slices(const std::vector<double>& slices, double p) {
  require(!slices.empty(), ErrorCode::invalid_argument, "no slices to reduce");
  double acc = 0.0;
  for (double s : slices) acc += s;
  return root(acc / static_cast<double>(slices.size()), p);
}

double sw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p, std::size_t L,
          const RandomSource& rng, unsigned threads) {
  return reduce_slices(sw_slices(mu, nu, p, L, rng, threads), p);
}

double csw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, SlicerVariant variant,
           bool nonlinear, double p, std::size_t L, const RandomSource& rng, unsigned threads) {
  return reduce_slices(csw_slices(mu, nu, variant, nonlinear, p, L, rng, threads), p);
}

AscentResult max_sw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p,
                    std::size_t steps, double learning_rate, const RandomSource& rng) {
  check_p(p);
  check_ascent(steps, learning_rate);
  check_pair(mu, nu, false);
  const std::size_t n = mu.size();
  const std::size_t dim = mu.support_length();
  auto sub = rng.substream(0);
  const Tensor3 init = sample_unit_tensor(mu.channels(), mu.dim(), sub);
  std::vector<double> theta(init.values().begin(), init.values().end());

  auto project_all = [&](const EmpiricalMeasure& m) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto xv = m[i].values();
      double acc = 0.0;
      for (std::size_t j = 0; j < dim; ++j) acc += xv[j] * theta[j];
      v[i] = acc;
    }
    return v;
  };

  Tracker tracker;
  std::vector<double> grad(dim);
  for (std::size_t step = 0;; ++step) {
    const auto xs = project_all(mu);
    const auto ys = project_all(nu);
    const auto sx = argsort(xs);
    const auto sy = argsort(ys);
    double wpp = 0.0;
    for (std::size_t i = 0; i < n; ++i) wpp += pow_abs(xs[sx[i]] - ys[sy[i]], p);
    wpp /= static_cast<double>(n);
    tracker.record(wpp, p);
    if (step == steps) break;

    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = pow_abs_derivative(xs[sx[i]] - ys[sy[i]], p) / static_cast<double>(n);
      if (g == 0.0) continue;
      auto xv = mu[sx[i]].values();
      auto yv = nu[sy[i]].values();
      for (std::size_t j = 0; j < dim; ++j) grad[j] += g * (xv[j] - yv[j]);
    }
    for (std::size_t j = 0; j < dim; ++j) theta[j] += learning_rate * grad[j];
    normalize_in_place(theta);
  }
  return std::move(tracker.result);
}

AscentResult max_csw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     SlicerVariant variant, double p, std::size_t steps, double learning_rate,
                     const RandomSource& rng, bool nonlinear) {
  check_p(p);
  check_ascent(steps, learning_rate);
  check_pair(mu, nu, false);
  const std::size_t n = mu.size();
  auto schedule = cached_schedule(variant, mu.channels(), mu.dim(), 1, nonlinear);
  auto sub = rng.substream(0);
  KernelStack stack = sample_kernel_stack(schedule, sub);

  Tracker tracker;
  for (std::size_t step = 0;; ++step) {
    const auto xs = project(stack, mu);
    const auto ys = project(stack, nu);
    const auto sx = argsort(xs);
    const auto sy = argsort(ys);
    double wpp = 0.0;
    for (std::size_t i = 0; i < n; ++i) wpp += pow_abs(xs[sx[i]] - ys[sy[i]], p);
    wpp /= static_cast<double>(n);
    tracker.record(wpp, p);
    if (step == steps) break;

    // Sorting permutation frozen; accumulate g_i * (dS(x) - dS(y)) per
    // matched pair so swapping the measures gives the same update.
    KernelSet grad = zero_kernel_set(*schedule);
    const double one = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = pow_abs_derivative(xs[sx[i]] - ys[sy[i]], p) / static_cast<double>(n);
      if (g == 0.0) continue;
      KernelSet gx = zero_kernel_set(*schedule);
      KernelSet gy = zero_kernel_set(*schedule);
      slicer_vjp(stack, mu[sx[i]], std::span<const double>(&one, 1), gx);
      slicer_vjp(stack, nu[sy[i]], std::span<const double>(&one, 1), gy);
      for (std::size_t l = 0; l < grad.size(); ++l) {
        auto dst = grad[l][0].values();
        auto a = gx[l][0].values();
        auto b = gy[l][0].values();
        for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += g * (a[e] - b[e]);
      }
    }
    for (std::size_t l = 0; l < grad.size(); ++l) {
      auto kv = stack.kernels[l][0].values();
      auto gv = grad[l][0].values();
      for (std::size_t e = 0; e < kv.size(); ++e) kv[e] += learning_rate * gv[e];
      normalize_in_place(kv);
    }
  }
  return std::move(tracker.result);
}

AscentResult prw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, std::size_t k, double p,
                 std::size_t steps, double learning_rate, const RandomSource& rng) {
  check_p(p);
  check_ascent(steps, learning_rate);
  check_pair(mu, nu, false);
  check_assignment_size(mu.size());
  const std::size_t n = mu.size();
  const auto dim = static_cast<Eigen::Index>(mu.support_length());
  require(k >= 1 && static_cast<Eigen::Index>(k) <= dim, ErrorCode::invalid_argument,
          "PRW needs 1 <= k <= c*d*d");

  // Column-major fill: column 0 consumes the same draws as the max-sw
  // initial direction.
  auto sub = rng.substream(0);
  Eigen::MatrixXd init(dim, static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < init.size(); ++i) init.data()[i] = sub.normal();
  Eigen::MatrixXd frame = stiefel_retract(init);

  const Eigen::MatrixXd x = as_matrix(mu);
  const Eigen::MatrixXd y = as_matrix(nu);

  Tracker tracker;
  for (std::size_t step = 0;; ++step) {
    const Eigen::MatrixXd px = x * frame;
    const Eigen::MatrixXd py = y * frame;
    std::vector<double> cx(px.rows() * px.cols()), cy(py.rows() * py.cols());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cx.data(), px.rows(), px.cols()) = px;
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cy.data(), py.rows(), py.cols()) = py;
    const auto plan = exact_wasserstein_plan(to_cloud(std::move(cx), n, k),
                                             to_cloud(std::move(cy), n, k), p);
    tracker.record(plan.cost, p);
    if (step == steps) break;

    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<Eigen::Index>(plan.match[i]);
      const auto ii = static_cast<Eigen::Index>(i);
      const Eigen::VectorXd v = (px.row(ii) - py.row(j)).transpose();
      const double norm = v.norm();
      if (norm == 0.0) continue;
      const double scale = (p == 2.0 ? 2.0 : p * std::pow(norm, p - 2.0)) / static_cast<double>(n);
      grad.noalias() += scale * (x.row(ii) - y.row(j)).transpose() * v.transpose();
    }
    frame = stiefel_retract(frame + learning_rate * grad);
  }
  return std::move(tracker.result);
}

AscentResult cprw(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, SlicerVariant variant,
                  std::size_t k, double p, std::size_t steps, double learning_rate,
                  const RandomSource& rng) {
  check_p(p);
  check_ascent(steps, learning_rate);
  check_pair(mu, nu, false);
  check_assignment_size(mu.size());
  const std::size_t n = mu.size();
  auto schedule = cached_schedule(variant, mu.channels(), mu.dim(), k, false);
  auto sub = rng.substream(0);
  KernelStack stack = sample_kernel_stack(schedule, sub);

  Tracker tracker;
  for (std::size_t step = 0;; ++step) {
    auto px = project_k(stack, mu);
    auto py = project_k(stack, nu);
    const auto plan = exact_wasserstein_plan(to_cloud(px, n, k), to_cloud(py, n, k), p);
    tracker.record(plan.cost, p);
    if (step == steps) break;

    KernelSet grad = zero_kernel_set(*schedule);
    std::vector<double> up(k), down(k);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = plan.match[i];
      double sq = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double t = px[i * k + c] - py[j * k + c];
        sq += t * t;
      }
      if (sq == 0.0) continue;
      const double norm = std::sqrt(sq);
      const double scale = (p == 2.0 ? 2.0 : p * std::pow(norm, p - 2.0)) / static_cast<double>(n);
      for (std::size_t c = 0; c < k; ++c) {
        up[c] = scale * (px[i * k + c] - py[j * k + c]);
        down[c] = -up[c];
      }
      slicer_vjp(stack, mu[i], up, grad);
      slicer_vjp(stack, nu[j], down, grad);
    }
    for (std::size_t l = 0; l < grad.size(); ++l) {
      for (std::size_t o = 0; o < grad[l].size(); ++o) {
        auto kv = stack.kernels[l][o].values();
        auto gv = grad[l][o].values();
        for (std::size_t e = 0; e < kv.size(); ++e) kv[e] += learning_rate * gv[e];
        normalize_in_place(kv);
      }
    }
  }
  return std::move(tracker.result);
}

double exact_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
  check_pair(mu, nu, false);
  auto flatten = [](const EmpiricalMeasure& m) {
    PointCloud cloud{m.size(), m.support_length(), {}};
    cloud.coords.reserve(cloud.n * cloud.k);
    for (const auto& x : m.supports()) {
      auto v = x.values();
      cloud.coords.insert(cloud.coords.end(), v.begin(), v.end());
    }
    return cloud;
  };
  return exact_wasserstein_assignment(flatten(mu), flatten(nu), p);
}

double distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, const MethodSpec& spec,
                unsigned threads) {
  validate(spec);
  const RandomSource rng(spec.seed);
  switch (spec.family) {
    case Family::sw:
      return reduce_slices(sw_slices(mu, nu, spec.p, spec.L, rng, threads, spec.allow_unequal),
                           spec.p);
    case Family::csw:
      return reduce_slices(csw_slices(mu, nu, spec.variant, spec.nonlinear, spec.p, spec.L, rng,
                                      threads, spec.allow_unequal),
                           spec.p);
    case Family::max_sw:
      return max_sw(mu, nu, spec.p, spec.steps, spec.learning_rate, rng).value;
    case Family::max_csw:
      return max_csw(mu, nu, spec.variant, spec.p, spec.steps, spec.learning_rate, rng,
                     spec.nonlinear)
          .value;
    case Family::prw:
      return prw(mu, nu, spec.k, spec.p, spec.steps, spec.learning_rate, rng).value;
    case Family::cprw:
      return cprw(mu, nu, spec.variant, spec.k, spec.p, spec.steps, spec.learning_rate, rng)
          .value;
    case Family::exact: return exact_distance(mu, nu, spec.p);
  }
  fail(ErrorCode::invalid_argument, "unsupported method");
}

}  // namespace csw
