// Command-line front end. Talks to the library only through csw.h.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csw/csw.h"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Thrown to unwind out of a subcommand with a specific exit code.
struct Failure {
  int exit_code;
  std::string code;
  std::string message;
};

void report_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"code", code}, {"message", message}}.dump() << "\n";
}

void check(csw_status status) {
  if (status == CSW_OK) return;
  throw Failure{kExitRuntime, csw_status_name(status), csw_last_error()};
}

// Argument validation failures are usage errors, not runtime errors.
void check_usage(csw_status status) {
  if (status == CSW_OK) return;
  throw Failure{kExitUsage, csw_status_name(status), csw_last_error()};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
};

using Measure = Handle<csw_measure, csw_measure_free>;
using Dataset = Handle<csw_dataset, csw_dataset_free>;
using Schedule = Handle<csw_schedule, csw_schedule_free>;
using Report = Handle<csw_report, csw_report_free>;

struct SpecFlags {
  std::string method = "csw-s";
  double p = 2.0;
  uint32_t L = 100;
  uint32_t k = 2;
  uint32_t steps = 100;
  double lr = 0.01;
  uint64_t seed = 42;
  bool allow_unequal = false;

  csw_method_spec to_spec() const {
    csw_method_spec s;
    csw_method_spec_init(&s);
    s.method = method.c_str();
    s.p = p;
    s.L = L;
    s.k = k;
    s.steps = steps;
    s.learning_rate = lr;
    s.seed = seed;
    s.allow_unequal = allow_unequal ? 1 : 0;
    return s;
  }
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f, bool with_method) {
  if (with_method) cmd->add_option("--method", f.method, "Estimator name")->capture_default_str();
  cmd->add_option("--p", f.p, "Wasserstein order")->capture_default_str();
  cmd->add_option("--L", f.L, "Number of projections")->capture_default_str();
  cmd->add_option("--k", f.k, "Projection dimension for prw/cprw")->capture_default_str();
  cmd->add_option("--steps", f.steps, "Ascent steps")->capture_default_str();
  cmd->add_option("--lr", f.lr, "Ascent learning rate")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
}

unsigned resolve_threads(unsigned flag) {
  if (const char* env = std::getenv("CSW_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0') {
      throw Failure{kExitUsage, "invalid_argument",
                    std::string("CSW_THREADS is not a non-negative integer: ") + env};
    }
    return static_cast<unsigned>(v);
  }
  return flag;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Failure{kExitRuntime, "io", "cannot open output file " + out};
  f << text;
  if (!text.empty() && text.back() != '\n') f << "\n";
  if (!f) throw Failure{kExitRuntime, "io", "failed writing output file " + out};
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

// ---- compare ----

struct CompareArgs {
  SpecFlags spec;
  std::string images, labels;
  std::size_t per_class = 0;
  std::size_t repeats = 1;
  std::string normalization = "unit";
  unsigned threads = 0;
  std::string out;
  std::string format = "csv";
};

void run_compare(const CompareArgs& a) {
  const auto spec = a.spec.to_spec();
  check_usage(csw_method_spec_validate(&spec));
  Dataset ds;
  check(csw_dataset_read_idx(a.images.c_str(), a.labels.c_str(), a.normalization.c_str(),
                             &ds.ptr));
  Report report;
  check(csw_compare(ds.ptr, &spec, a.per_class, a.repeats, resolve_threads(a.threads),
                    &report.ptr));
  const char* text = nullptr;
  check(csw_report_render(report.ptr, a.format.c_str(), &text));
  emit(text, a.out);
}

// ---- distance ----

struct DistanceArgs {
  SpecFlags spec;
  std::string a, b;
  unsigned threads = 0;
  std::string out;
};

void run_distance(const DistanceArgs& a) {
  const auto spec = a.spec.to_spec();
  check_usage(csw_method_spec_validate(&spec));
  Measure x, y;
  check(csw_measure_read(a.a.c_str(), &x.ptr));
  check(csw_measure_read(a.b.c_str(), &y.ptr));
  std::size_t n = 0, m = 0, c = 0, d = 0;
  check(csw_measure_shape(x.ptr, &n, &c, &d));
  check(csw_measure_shape(y.ptr, &m, nullptr, nullptr));

  const auto start = std::chrono::steady_clock::now();
  double value = 0.0;
  uint64_t params = 0;
  check(csw_distance(x.ptr, y.ptr, &spec, resolve_threads(a.threads), &value, &params));
  const double ms = elapsed_ms(start);
  uint64_t macs = 0;
  check(csw_method_costs(&spec, c, d, nullptr, &macs));

  json r;
  r["method"] = a.spec.method;
  r["p"] = spec.p;
  r["L"] = spec.L;
  r["k"] = spec.k;
  r["steps"] = spec.steps;
  r["lr"] = spec.learning_rate;
  r["seed"] = spec.seed;
  r["value"] = value;
  r["runtime_ms"] = ms;
  r["param_count"] = params;
  r["mac_count"] = macs;
  r["n_a"] = n;
  r["n_b"] = m;
  r["channels"] = c;
  r["dim"] = d;
  emit(r.dump(2), a.out);
}

// ---- slicer-info ----

struct SlicerInfoArgs {
  std::string variant = "stride";
  std::size_t c = 1;
  std::size_t d = 28;
  std::size_t k = 1;
  bool nonlinear = false;
  std::string format = "text";
  std::string out;
};

void run_slicer_info(const SlicerInfoArgs& a) {
  Schedule s;
  check_usage(csw_schedule_create(a.variant.c_str(), a.c, a.d, a.k, a.nonlinear ? 1 : 0, &s.ptr));
  std::size_t count = 0;
  uint64_t params = 0, macs = 0;
  check(csw_schedule_num_layers(s.ptr, &count));
  check(csw_schedule_param_count(s.ptr, &params));
  check(csw_schedule_mac_count(s.ptr, &macs));
  std::vector<csw_layer_info> layers(count);
  for (std::size_t i = 0; i < count; ++i) check(csw_schedule_layer(s.ptr, i, &layers[i]));

  if (a.format == "json") {
    json r;
    r["variant"] = a.variant;
    r["channels"] = a.c;
    r["dim"] = a.d;
    r["k"] = a.k;
    r["nonlinear"] = a.nonlinear;
    r["layers"] = json::array();
    for (const auto& l : layers) {
      r["layers"].push_back({{"in_channels", l.in_channels},
                             {"out_channels", l.out_channels},
                             {"kernel", l.kernel},
                             {"stride", l.stride},
                             {"dilation", l.dilation},
                             {"input_dim", l.input_dim},
                             {"output_dim", l.output_dim},
                             {"activation", l.sigmoid ? "sigmoid" : "none"}});
    }
    r["param_count"] = params;
    r["mac_count"] = macs;
    emit(r.dump(2), a.out);
    return;
  }
  std::ostringstream os;
  os << "variant " << a.variant << " c " << a.c << " d " << a.d << " k " << a.k << " nonlinear "
     << (a.nonlinear ? "true" : "false") << "\n";
  for (std::size_t i = 0; i < count; ++i) {
    const auto& l = layers[i];
    os << "layer " << i << ": " << l.out_channels << "x" << l.in_channels << "x" << l.kernel << "x"
       << l.kernel << " stride " << l.stride << " dilation " << l.dilation << " dim "
       << l.input_dim << " -> " << l.output_dim << " activation "
       << (l.sigmoid ? "sigmoid" : "none") << "\n";
  }
  os << "param_count " << params << "\n";
  os << "mac_count " << macs << "\n";
  emit(os.str(), a.out);
}

// ---- bench ----

struct BenchArgs {
  SpecFlags spec;
  std::size_t c = 1;
  std::size_t d = 28;
  std::size_t n = 100;
  std::vector<std::string> methods{"sw", "csw-b", "csw-s", "csw-d"};
  unsigned threads = 0;
  std::string out;
  std::string format = "csv";
};

void run_bench(const BenchArgs& a) {
  std::vector<SpecFlags> specs;
  for (const auto& m : a.methods) {
    SpecFlags f = a.spec;
    f.method = m;
    const auto s = f.to_spec();
    check_usage(csw_method_spec_validate(&s));
    specs.push_back(f);
  }
  Measure x, y;
  check(csw_measure_gaussian(a.n, a.c, a.d, 0.0, a.spec.seed, &x.ptr));
  check(csw_measure_gaussian(a.n, a.c, a.d, 1.0, a.spec.seed + 1, &y.ptr));
  const unsigned threads = resolve_threads(a.threads);

  json rows = json::array();
  for (const auto& f : specs) {
    const auto s = f.to_spec();
    uint64_t params = 0, macs = 0;
    check(csw_method_costs(&s, a.c, a.d, &params, &macs));
    const auto start = std::chrono::steady_clock::now();
    double value = 0.0;
    check(csw_distance(x.ptr, y.ptr, &s, threads, &value, nullptr));
    const double ms = elapsed_ms(start);
    rows.push_back({{"method", f.method},
                    {"value", value},
                    {"wall_ms", ms},
                    {"param_count", params},
                    {"mac_count", macs}});
  }

  if (a.format == "json") {
    json r;
    r["c"] = a.c;
    r["d"] = a.d;
    r["n"] = a.n;
    r["L"] = a.spec.L;
    r["p"] = a.spec.p;
    r["seed"] = a.spec.seed;
    r["threads"] = threads;
    r["results"] = rows;
    emit(r.dump(2), a.out);
    return;
  }
  std::ostringstream os;
  os << "method,value,wall_ms,param_count,mac_count\n";
  for (const auto& row : rows) {
    char value[64];
    std::snprintf(value, sizeof value, "%.17g", row["value"].get<double>());
    os << row["method"].get<std::string>() << "," << value << "," << row["wall_ms"].get<double>()
       << "," << row["param_count"].get<uint64_t>() << "," << row["mac_count"].get<uint64_t>()
       << "\n";
  }
  emit(os.str(), a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sliced and convolution-sliced Wasserstein distances between image measures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", csw_version());

  CompareArgs compare;
  auto* c = app.add_subcommand("compare", "Class-by-class distance matrix on an IDX dataset");
  c->add_option("--images", compare.images, "IDX image file")->required();
  c->add_option("--labels", compare.labels, "IDX label file")->required();
  add_spec_flags(c, compare.spec, true);
  c->add_option("--per-class", compare.per_class, "Images per class (0: smallest class)");
  c->add_option("--repeats", compare.repeats, "Independent repetitions")->capture_default_str();
  c->add_option("--normalization", compare.normalization, "Pixel scaling")
      ->check(CLI::IsMember({"none", "unit", "signed"}))
      ->capture_default_str();
  c->add_option("--threads", compare.threads, "Worker threads (0: all cores)");
  c->add_option("--out", compare.out, "Output file (default stdout)");
  c->add_option("--format", compare.format)->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  DistanceArgs distance;
  auto* di = app.add_subcommand("distance", "Distance between two CSWT tensor files");
  di->add_option("a", distance.a, "First measure")->required();
  di->add_option("b", distance.b, "Second measure")->required();
  add_spec_flags(di, distance.spec, true);
  di->add_flag("--allow-unequal", distance.spec.allow_unequal,
               "Allow measures with different support counts");
  di->add_option("--threads", distance.threads, "Worker threads (0: all cores)");
  di->add_option("--out", distance.out, "Output file (default stdout)");

  SlicerInfoArgs info;
  auto* si = app.add_subcommand("slicer-info", "Print a convolution slicer schedule");
  si->add_option("--variant", info.variant)
      ->check(CLI::IsMember({"base", "stride", "dilation", "full", "b", "s", "d"}))
      ->capture_default_str();
  si->add_option("--c", info.c, "Input channels")->capture_default_str();
  si->add_option("--d", info.d, "Input spatial size")->capture_default_str();
  si->add_option("--k", info.k, "Output channels")->capture_default_str();
  si->add_flag("--nonlinear", info.nonlinear, "Sigmoid between layers");
  si->add_option("--format", info.format)->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  si->add_option("--out", info.out, "Output file (default stdout)");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time estimators on synthetic Gaussian measures");
  b->add_option("--c", bench.c, "Input channels")->capture_default_str();
  b->add_option("--d", bench.d, "Input spatial size")->capture_default_str();
  b->add_option("--n", bench.n, "Supports per measure")->capture_default_str();
  b->add_option("--methods", bench.methods, "Comma separated estimators")->delimiter(',');
  add_spec_flags(b, bench.spec, false);
  b->add_option("--threads", bench.threads, "Worker threads (0: all cores)");
  b->add_option("--out", bench.out, "Output file (default stdout)");
  b->add_option("--format", bench.format)->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kExitUsage;
  }

  try {
    if (c->parsed()) run_compare(compare);
    if (di->parsed()) run_distance(distance);
    if (si->parsed()) run_slicer_info(info);
    if (b->parsed()) run_bench(bench);
  } catch (const Failure& f) {
    report_error(f.code, f.message);
    return f.exit_code;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kExitRuntime;
  }
  return 0;
}
