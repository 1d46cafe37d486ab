// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
//   acceptance --cli PATH_TO_CSW --mnist DIR [--only N]
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "csw/compare.hpp"
#include "csw/convolution.hpp"
#include "csw/dataio.hpp"
#include "csw/distances.hpp"
#include "csw/ot.hpp"
#include "csw/slicer.hpp"
#include "oracles.hpp"

using namespace csw;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Options {
  std::string cli;
  std::string mnist;
  int only = 0;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string capture(const std::string& cmd) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return out;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  pclose(pipe);
  return out;
}

long param_count_line(const std::string& text) {
  const auto pos = text.find("param_count ");
  if (pos == std::string::npos) return -1;
  return std::stol(text.substr(pos + 12));
}

// ---- 1: projection memory ----
Outcome projection_memory(const Options& o) {
  struct Case {
    const char* variant;
    long want;
  };
  Outcome r{true, ""};
  for (const Case c : {Case{"base", 338}, Case{"stride", 57}, Case{"dilation", 57}}) {
    const std::string cmd =
        "'" + o.cli + "' slicer-info --variant " + c.variant + " --c 1 --d 28 2>&1";
    const long got = param_count_line(capture(cmd));
    r.detail += std::string(c.variant) + "=" + std::to_string(got) + " ";
    if (got != c.want) r.pass = false;
  }
  return r;
}

// ---- 2: MNIST class structure ----
Outcome mnist_structure(const Options& o) {
  const std::filesystem::path dir = o.mnist;
  const auto images = dir / "train-images-idx3-ubyte";
  const auto labels = dir / "train-labels-idx1-ubyte";
  if (!std::filesystem::exists(images) || !std::filesystem::exists(labels)) {
    return {false, "MNIST IDX files not found under " + o.mnist};
  }
  const auto ds = read_idx_dataset(images, labels, Normalization::unit);
  // Full classes: smaller subsamples inflate the same-class diagonal.
  constexpr std::size_t per_class = 0;
  Outcome r{true, "n=" + std::to_string(ds.images.size()) + " full classes;"};
  for (const char* name : {"sw", "csw-b", "csw-s", "csw-d"}) {
    MethodSpec s = parse_method(name);
    s.p = 2.0;
    s.L = 100;
    const auto rep = compare_classes(ds, s, per_class, 1, 0);
    double max_diag = 0.0, min_off = INFINITY;
    for (std::size_t i = 0; i < rep.matrix.size(); ++i) {
      for (std::size_t j = 0; j < rep.matrix.size(); ++j) {
        if (i == j) max_diag = std::max(max_diag, rep.matrix[i][j]);
        else min_off = std::min(min_off, rep.matrix[i][j]);
      }
    }
    const double ratio = min_off / max_diag;
    r.detail += std::string(" ") + name + " ratio=" + fmt("%.2f", ratio) + " (diag " +
                fmt("%.4f", max_diag) + ", off " + fmt("%.4f", min_off) + ", " +
                fmt("%.0f", rep.runtime_ms / 1000.0) + "s)";
    if (!(ratio >= 5.0)) r.pass = false;
  }
  return r;
}

// ---- 3: 1D and assignment oracles ----
Outcome oracle_equivalence(const Options&) {
  std::mt19937_64 g(3);
  double worst1 = 0.0, worst2 = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + g() % 64;
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = oracle::gaussian(g);
    for (auto& v : y) v = oracle::gaussian(g) * 2.0 + 0.5;
    const double p = t % 2 == 0 ? 2.0 : 1.0;
    const double a = wasserstein1d_equal(x, y, p);
    const double b = exact_wasserstein_assignment({n, 1, x}, {n, 1, y}, p);
    worst1 = std::max(worst1, std::abs(a - b));
  }
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + g() % 7, k = 1 + g() % 4;
    std::vector<double> x(n * k), y(n * k);
    for (auto& v : x) v = oracle::gaussian(g);
    for (auto& v : y) v = oracle::gaussian(g);
    const double p = t % 2 == 0 ? 2.0 : 1.0;
    const double a = exact_wasserstein_assignment({n, k, x}, {n, k, y}, p);
    worst2 = std::max(worst2, std::abs(a - oracle::brute_force_wasserstein(x, y, n, k, p)));
  }
  return {worst1 <= 1e-10 && worst2 <= 1e-10,
          "max |1D - assignment|=" + fmt("%.2e", worst1) + ", max |assignment - brute|=" +
              fmt("%.2e", worst2)};
}

// ---- 4: conventional slicing equivalence ----
Outcome sw_equivalence(const Options&) {
  std::mt19937_64 g(4);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto a = oracle::random_measure(32, 3, 8, g);
    const auto b = oracle::random_measure(32, 3, 8, g, 1.2, 0.1);
    MethodSpec s = parse_method("sw"), f = parse_method("csw-full");
    s.L = f.L = 50;
    s.seed = f.seed = 1000 + t;
    worst = std::max(worst, std::abs(distance(a, b, s, 1) - distance(a, b, f, 1)));
  }
  return {worst <= 1e-12, "max |SW - one-layer CSW|=" + fmt("%.2e", worst)};
}

// ---- 5: pseudo-metric properties ----
Outcome pseudo_metric(const Options&) {
  std::mt19937_64 g(5);
  bool symmetric = true;
  double worst_self = 0.0, worst_triangle = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto x = oracle::random_measure(12, 2, 8, g);
    const auto y = oracle::random_measure(12, 2, 8, g, 1.0, 0.3);
    const auto z = oracle::random_measure(12, 2, 8, g, 0.7, -0.2);
    for (const char* name : {"csw-b", "csw-s", "csw-d", "ncsw-b", "ncsw-s", "ncsw-d"}) {
      for (double p : {1.0, 2.0}) {
        MethodSpec s = parse_method(name);
        s.p = p;
        s.L = 10;
        s.seed = 7000 + t;
        const double xy = distance(x, y, s, 1);
        const double yx = distance(y, x, s, 1);
        const double xz = distance(x, z, s, 1);
        const double zy = distance(z, y, s, 1);
        symmetric = symmetric && xy == yx;
        worst_self = std::max({worst_self, distance(x, x, s, 1), distance(z, z, s, 1)});
        worst_triangle = std::max(worst_triangle, xy - (xz + zy));
      }
    }
  }
  return {symmetric && worst_self <= 1e-12 && worst_triangle <= 1e-9,
          std::string("symmetry ") + (symmetric ? "exact" : "BROKEN") + ", max self=" +
              fmt("%.2e", worst_self) + ", max triangle excess=" + fmt("%.2e", worst_triangle)};
}

// ---- 6: per-projection ordering bound ----
Outcome ordering_bound(const Options&) {
  std::mt19937_64 g(6);
  double worst_s = -INFINITY, worst_d = -INFINITY, worst_b = -INFINITY;
  std::size_t b_violations = 0;
  const std::array<std::size_t, 3> dims{8, 16, 28};
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = dims[t % 3];
    // Nearby measures keep the exact distance small so the bound is tight.
    const auto a = oracle::random_measure(32, 1, d, g);
    std::vector<Tensor3> moved;
    const double scale = 0.02 * static_cast<double>(1 + t % 5);
    for (const auto& x : a.supports()) {
      Tensor3 y = x;
      for (double& v : y.values()) v += scale * oracle::gaussian(g);
      moved.push_back(std::move(y));
    }
    const EmpiricalMeasure b(std::move(moved));
    const double p = t % 2 == 0 ? 2.0 : 1.0;
    const double exact = exact_distance(a, b, p);
    const RandomSource rng(9000 + t);
    auto worst_excess = [&](SlicerVariant v, std::size_t* violations) {
      double w = -INFINITY;
      for (double slice : csw_slices(a, b, v, false, p, 20, rng, 1)) {
        const double excess = std::pow(slice, 1.0 / p) - exact;
        w = std::max(w, excess);
        if (violations && excess > 1e-9) ++*violations;
      }
      return w;
    };
    worst_s = std::max(worst_s, worst_excess(SlicerVariant::stride, nullptr));
    worst_d = std::max(worst_d, worst_excess(SlicerVariant::dilation, nullptr));
    worst_b = std::max(worst_b, worst_excess(SlicerVariant::base, &b_violations));
  }
  return {worst_s <= 1e-9 && worst_d <= 1e-9,
          "max(slice W - exact W): stride=" + fmt("%.3e", worst_s) + " dilation=" +
              fmt("%.3e", worst_d) + "; base (report only)=" + fmt("%.3e", worst_b) + " with " +
              std::to_string(b_violations) + "/4000 slices above the bound"};
}

// ---- 7: Monte Carlo variance rate ----
Outcome variance_rate(const Options&) {
  std::mt19937_64 g(7);
  const auto a = oracle::random_measure(50, 1, 16, g);
  const auto b = oracle::random_measure(50, 1, 16, g, 1.3, 0.2);
  std::vector<double> log_l, log_var;
  std::string detail;
  for (std::size_t L : {10u, 20u, 40u, 80u}) {
    std::vector<double> values;
    for (std::uint64_t r = 0; r < 200; ++r) {
      MethodSpec s = parse_method("csw-s");
      s.L = L;
      s.seed = derive_seed(77, r + 1);
      values.push_back(distance(a, b, s, 0));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= values.size() - 1;
    log_l.push_back(std::log(static_cast<double>(L)));
    log_var.push_back(std::log(var));
    detail += "L=" + std::to_string(L) + " var=" + fmt("%.3e", var) + " ";
  }
  const double slope = oracle::slope(log_l, log_var);
  return {slope >= -1.3 && slope <= -0.7, "slope=" + fmt("%.3f", slope) + "; " + detail};
}

// ---- 8: sample complexity trend ----
Outcome sample_complexity(const Options&) {
  std::mt19937_64 g(8);
  auto clipped = [&](std::size_t n) {
    std::vector<Tensor3> s;
    for (std::size_t i = 0; i < n; ++i) {
      Tensor3 t(1, 8);
      for (double& v : t.values()) v = std::clamp(oracle::gaussian(g), -2.0, 2.0);
      s.push_back(std::move(t));
    }
    return EmpiricalMeasure(std::move(s));
  };
  std::vector<double> log_n, log_e;
  std::string detail;
  for (std::size_t n = 16; n <= 512; n *= 2) {
    double acc = 0.0;
    constexpr int reps = 20;
    for (int r = 0; r < reps; ++r) {
      MethodSpec s = parse_method("csw-s");
      s.L = 50;
      s.seed = 500 + r;
      acc += distance(clipped(n), clipped(n), s, 0);
    }
    acc /= reps;
    log_n.push_back(std::log(static_cast<double>(n)));
    log_e.push_back(std::log(acc));
    detail += "n=" + std::to_string(n) + ":" + fmt("%.4f", acc) + " ";
  }
  const double slope = oracle::slope(log_n, log_e);
  return {slope <= -0.3, "slope=" + fmt("%.3f", slope) + "; " + detail};
}

// ---- 9: slicer gradients ----
Outcome gradient_check(const Options&) {
  std::mt19937_64 g(9);
  double worst = 0.0;
  const std::array<std::size_t, 4> dims{8, 11, 16, 28};
  std::uint64_t idx = 0;
  const RandomSource src(99);
  for (auto v : {SlicerVariant::base, SlicerVariant::stride, SlicerVariant::dilation}) {
    for (bool nl : {false, true}) {
      for (int t = 0; t < 50; ++t) {
        const std::size_t d = dims[t % 4];
        const std::size_t c = t % 2 == 0 ? 1 : 3;
        auto sub = src.substream(idx++);
        KernelStack stack = sample_kernel_stack(
            std::make_shared<const SlicerSchedule>(make_k_schedule(v, c, d, 1, nl)), sub);
        const auto x = oracle::random_tensor(c, d, g);
        const auto grad = apply_slicer_with_grad(stack, x);
        std::vector<double*> params;
        std::vector<double> analytic;
        for (std::size_t l = 0; l < stack.kernels.size(); ++l) {
          for (double& w : stack.kernels[l][0].values()) params.push_back(&w);
          for (double w : grad.kernels[l][0].values()) analytic.push_back(w);
        }
        const auto numeric = oracle::central_difference(
            [&] { return apply_slicer_scalar(stack, x); }, params, 1e-6);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < numeric.size(); ++i) {
          num += (numeric[i] - analytic[i]) * (numeric[i] - analytic[i]);
          den += numeric[i] * numeric[i];
        }
        worst = std::max(worst, std::sqrt(num / den));
      }
    }
  }
  return {worst <= 1e-5, "max relative gradient error=" + fmt("%.2e", worst) + " over 300 cases"};
}

// ---- 10: ascent sanity ----
Outcome ascent_sanity(const Options&) {
  std::mt19937_64 g(10);
  bool monotone = true;
  for (int t = 0; t < 10; ++t) {
    const auto a = oracle::random_measure(16, 1, 8, g);
    const auto b = oracle::random_measure(16, 1, 8, g, 1.4, 0.1);
    for (auto v : {SlicerVariant::base, SlicerVariant::stride, SlicerVariant::dilation}) {
      const auto r = max_csw(a, b, v, 2.0, 50, 0.05, RandomSource(300 + t));
      for (std::size_t i = 1; i < r.best.size(); ++i) monotone = monotone && r.best[i] >= r.best[i - 1];
      monotone = monotone && r.value >= r.iterates.front();
    }
  }
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const auto x = oracle::random_tensor(1, 8, g);
    const auto y = oracle::random_tensor(1, 8, g);
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sq += std::pow(x.values()[i] - y.values()[i], 2);
    const double target = std::sqrt(sq);
    const EmpiricalMeasure mx({x}), my({y});
    const RandomSource rng(400 + t);
    worst = std::max(worst, std::abs(max_sw(mx, my, 2.0, 500, 0.1, rng).value - target));
    worst = std::max(worst, std::abs(prw(mx, my, 2, 2.0, 500, 0.1, rng).value - target));
  }
  return {monotone && worst <= 1e-6,
          std::string("max-csw best-so-far ") + (monotone ? "nondecreasing" : "DECREASED") +
              "; two-Dirac max |value - ||X-Y|||=" + fmt("%.2e", worst)};
}

// ---- 11: shape totality ----
Outcome shape_totality(const Options&) {
  std::mt19937_64 g(11);
  std::size_t checked = 0, failed = 0;
  std::string first_failure;
  const RandomSource src(11);
  for (auto v : {SlicerVariant::base, SlicerVariant::stride, SlicerVariant::dilation,
                 SlicerVariant::full}) {
    for (bool nl : {false, true}) {
      if (v == SlicerVariant::full && nl) continue;
      for (std::size_t c : {1u, 3u}) {
        for (std::size_t d = 2; d <= 129; ++d) {
          ++checked;
          try {
            auto schedule = std::make_shared<const SlicerSchedule>(make_k_schedule(v, c, d, 1, nl));
            std::size_t cur = d;
            for (const auto& l : schedule->layers) cur = output_dim(cur, l.kernel, l.stride, l.dilation);
            auto sub = src.substream(checked);
            const auto stack = sample_kernel_stack(schedule, sub);
            const auto y = apply_slicer(stack, oracle::random_tensor(c, d, g));
            if (cur != 1 || y.size() != 1 || !std::isfinite(y[0])) throw std::runtime_error("bad output");
          } catch (const std::exception& e) {
            if (failed++ == 0) {
              first_failure = std::string(variant_name(v)) + " c=" + std::to_string(c) +
                              " d=" + std::to_string(d) + ": " + e.what();
            }
          }
        }
      }
    }
  }
  return {failed == 0, std::to_string(checked) + " configurations, " + std::to_string(failed) +
                           " failures" + (failed ? " (first: " + first_failure + ")" : "")};
}

// ---- 12: determinism across thread counts ----
Outcome determinism(const Options&) {
  std::mt19937_64 g(12);
  const auto a = oracle::random_measure(12, 1, 8, g);
  const auto b = oracle::random_measure(12, 1, 8, g, 1.1, 0.3);
  std::size_t methods = 0;
  std::string broken;
  for (const char* name : {"sw", "csw-b", "csw-s", "csw-d", "csw-full", "ncsw-b", "ncsw-s",
                           "ncsw-d", "max-sw", "max-csw-b", "max-csw-s", "max-csw-d", "prw",
                           "cprw-b", "cprw-s", "cprw-d", "exact"}) {
    MethodSpec s = parse_method(name);
    s.L = 30;
    s.steps = 10;
    const double ref = distance(a, b, s, 1);
    for (unsigned threads : {1u, 2u, 4u, 0u}) {
      if (distance(a, b, s, threads) != ref) broken += std::string(name) + " ";
    }
    ++methods;
  }
  // Class comparison as well.
  std::vector<Tensor3> images;
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    images.push_back(oracle::random_tensor(1, 8, g, 1.0, i % 3));
    labels.push_back(i % 3);
  }
  const auto ds = make_dataset(images, labels, Normalization::none);
  MethodSpec s = parse_method("csw-d");
  s.L = 25;
  const auto r1 = compare_classes(ds, s, 0, 3, 1);
  const auto r4 = compare_classes(ds, s, 0, 3, 4);
  if (r1.matrix != r4.matrix || *r1.stddev != *r4.stddev) broken += "compare ";
  return {broken.empty(), std::to_string(methods) + " estimators + compare bit-identical across "
                                                    "1/2/4/all threads" +
                              (broken.empty() ? "" : "; differs: " + broken)};
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--cli") o.cli = argv[i + 1];
    else if (key == "--mnist") o.mnist = argv[i + 1];
    else if (key == "--only") o.only = std::stoi(argv[i + 1]);
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(const Options&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "projection memory exactness", projection_memory},
      {2, "MNIST class structure", mnist_structure},
      {3, "oracle equivalence", oracle_equivalence},
      {4, "conventional slicing equivalence", sw_equivalence},
      {5, "pseudo-metric properties", pseudo_metric},
      {6, "per-projection ordering bound", ordering_bound},
      {7, "Monte Carlo variance rate", variance_rate},
      {8, "sample complexity trend", sample_complexity},
      {9, "slicer gradient correctness", gradient_check},
      {10, "ascent sanity", ascent_sanity},
      {11, "shape totality", shape_totality},
      {12, "determinism across thread counts", determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (o.only != 0 && o.only != c.id) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = c.run(o);
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << r.detail
              << " [" << fmt("%.1f", secs) << "s]" << std::endl;
    if (!r.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
