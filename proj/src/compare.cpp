#include "csw/compare.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <span>

#include "csw/error.hpp"
#include "csw/ot.hpp"
#include "csw/parallel.hpp"

namespace csw {

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix square(std::size_t m) { return Matrix(m, std::vector<double>(m, 0.0)); }

// Shares one projection of every selected image across all class pairs.
Matrix monte_carlo_matrix(const std::vector<ClassSplit>& splits, const MethodSpec& spec,
                          unsigned threads) {
  const std::size_t m = splits.size();
  const auto& first = splits.front().full;
  const RandomSource rng(spec.seed);
  std::shared_ptr<const SlicerSchedule> schedule;
  if (spec.family == Family::csw) {
    schedule = cached_schedule(spec.variant, first.channels(), first.dim(), 1, spec.nonlinear);
  }

  std::vector<Matrix> per_projection(spec.L, square(m));
  parallel_for(spec.L, threads, [&](std::size_t l) {
    auto sub = rng.substream(l);
    std::function<std::vector<double>(const EmpiricalMeasure&)> proj;
    Tensor3 direction;
    KernelStack stack;
    if (spec.family == Family::sw) {
      direction = sample_unit_tensor(first.channels(), first.dim(), sub);
      proj = [&](const EmpiricalMeasure& x) { return project_direction(direction, x); };
    } else {
      stack = sample_kernel_stack(schedule, sub);
      proj = [&](const EmpiricalMeasure& x) { return project(stack, x); };
    }
    std::vector<std::vector<double>> values;
    values.reserve(m);
    for (const auto& s : splits) values.push_back(proj(s.full));

    Matrix& out = per_projection[l];
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t half = splits[i].half_a.size();
      const auto& v = values[i];
      out[i][i] = sliced_cost_pow({v.begin(), v.begin() + half},
                                  {v.begin() + half, v.begin() + 2 * half}, spec.p);
      for (std::size_t j = i + 1; j < m; ++j) {
        // The 1D cost is exactly symmetric, so the mirror entry is identical.
        out[i][j] = out[j][i] = sliced_cost_pow(values[i], values[j], spec.p);
      }
    }
  });

  Matrix result = square(m);
  std::vector<double> column(spec.L);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t l = 0; l < spec.L; ++l) column[l] = per_projection[l][i][j];
      result[i][j] = reduce_slices(column, spec.p);
    }
  }
  return result;
}

Matrix pairwise_matrix(const std::vector<ClassSplit>& splits, const MethodSpec& spec,
                       unsigned threads) {
  const std::size_t m = splits.size();
  Matrix result = square(m);
  parallel_for(m * m, threads, [&](std::size_t idx) {
    const std::size_t i = idx / m;
    const std::size_t j = idx % m;
    result[i][j] = i == j ? distance(splits[i].half_a, splits[i].half_b, spec, 1)
                          : distance(splits[i].full, splits[j].full, spec, 1);
  });
  return result;
}

}  // namespace

Matrix class_distance_matrix(const std::vector<ClassSplit>& splits, const MethodSpec& spec,
                             unsigned threads) {
  validate(spec);
  require(!splits.empty(), ErrorCode::invalid_argument, "no classes to compare");
  if (is_monte_carlo(spec.family)) return monte_carlo_matrix(splits, spec, threads);
  if (uses_assignment(spec.family)) {
    for (const auto& s : splits) {
      require(s.full.size() <= kMaxAssignmentSize, ErrorCode::capacity,
              "method " + method_name(spec) + " accepts at most " +
                  std::to_string(kMaxAssignmentSize) + " supports per class, got " +
                  std::to_string(s.full.size()));
    }
  }
  return pairwise_matrix(splits, spec, threads);
}

DistanceMatrixReport compare_classes(const LabeledDataset& dataset, const MethodSpec& spec,
                                     std::size_t per_class, std::size_t repeats,
                                     unsigned threads) {
  validate(spec);
  require(repeats >= 1, ErrorCode::invalid_argument, "repeats must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  if (per_class == 0) per_class = min_class_count(dataset);
  const auto splits = split_by_class(dataset, per_class, spec.seed);

  std::vector<Matrix> runs;
  for (std::size_t r = 0; r < repeats; ++r) {
    MethodSpec run = spec;
    run.seed = derive_seed(spec.seed, r);
    runs.push_back(class_distance_matrix(splits, run, threads));
  }

  const std::size_t m = splits.size();
  DistanceMatrixReport report;
  report.spec = spec;
  report.normalization = dataset.normalization;
  for (const auto& s : splits) report.classes.push_back(s.label);
  report.per_class = per_class;
  report.repeats = repeats;
  report.param_count =
      projection_param_count(spec, dataset.images.front().channels(), dataset.images.front().dim());
  if (repeats == 1) {
    report.matrix = std::move(runs.front());
  } else {
    // Mean and population standard deviation over repetitions.
    report.matrix = square(m);
    Matrix sd = square(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double mean = 0.0;
        for (const auto& run : runs) mean += run[i][j];
        mean /= static_cast<double>(repeats);
        double var = 0.0;
        for (const auto& run : runs) var += (run[i][j] - mean) * (run[i][j] - mean);
        report.matrix[i][j] = mean;
        sd[i][j] = std::sqrt(var / static_cast<double>(repeats));
      }
    }
    report.stddev = std::move(sd);
  }
  report.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace csw
