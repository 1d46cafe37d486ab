#include "csw/csw.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "csw/compare.hpp"
#include "csw/dataio.hpp"
#include "csw/distances.hpp"
#include "csw/error.hpp"
#include "csw/slicer.hpp"

struct csw_measure {
  csw::EmpiricalMeasure measure;
};

struct csw_dataset {
  csw::LabeledDataset dataset;
};

struct csw_schedule {
  csw::SlicerSchedule schedule;
};

struct csw_report {
  csw::DistanceMatrixReport report;
  std::string rendered;
};

namespace {

thread_local std::string last_error;

csw_status to_status(csw::ErrorCode code) {
  switch (code) {
    case csw::ErrorCode::invalid_argument: return CSW_ERR_INVALID_ARGUMENT;
    case csw::ErrorCode::invalid_shape: return CSW_ERR_INVALID_SHAPE;
    case csw::ErrorCode::format: return CSW_ERR_FORMAT;
    case csw::ErrorCode::io: return CSW_ERR_IO;
    case csw::ErrorCode::capacity: return CSW_ERR_CAPACITY;
  }
  return CSW_ERR_INTERNAL;
}

template <class F>
csw_status guarded(F&& body) noexcept {
  try {
    last_error.clear();
    body();
    return CSW_OK;
  } catch (const csw::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CSW_ERR_CAPACITY;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CSW_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return CSW_ERR_INTERNAL;
  }
}

void need(const void* ptr, const char* what) {
  csw::require(ptr != nullptr, csw::ErrorCode::invalid_argument,
               std::string("null pointer argument: ") + what);
}

csw::MethodSpec to_spec(const csw_method_spec* spec) {
  need(spec, "spec");
  need(spec->method, "spec->method");
  csw::MethodSpec s = csw::parse_method(spec->method);
  s.p = spec->p;
  s.L = spec->L;
  s.k = spec->k;
  s.steps = spec->steps;
  s.learning_rate = spec->learning_rate;
  s.seed = spec->seed;
  s.allow_unequal = spec->allow_unequal != 0;
  csw::validate(s);
  return s;
}

}  // namespace

extern "C" {

const char* csw_last_error(void) { return last_error.c_str(); }

const char* csw_status_name(csw_status status) {
  switch (status) {
    case CSW_OK: return "ok";
    case CSW_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case CSW_ERR_INVALID_SHAPE: return "invalid_shape";
    case CSW_ERR_FORMAT: return "format";
    case CSW_ERR_IO: return "io";
    case CSW_ERR_CAPACITY: return "capacity";
    case CSW_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* csw_version(void) { return "1.0.0"; }

csw_status csw_method_spec_init(csw_method_spec* spec) {
  return guarded([&] {
    need(spec, "spec");
    const csw::MethodSpec d;
    spec->method = "csw-s";
    spec->p = d.p;
    spec->L = static_cast<uint32_t>(d.L);
    spec->k = static_cast<uint32_t>(d.k);
    spec->steps = static_cast<uint32_t>(d.steps);
    spec->learning_rate = d.learning_rate;
    spec->seed = d.seed;
    spec->allow_unequal = 0;
  });
}

csw_status csw_method_spec_validate(const csw_method_spec* spec) {
  return guarded([&] { (void)to_spec(spec); });
}

csw_status csw_measure_create(size_t n, size_t c, size_t d, const double* data,
                              csw_measure** out) {
  return guarded([&] {
    need(data, "data");
    need(out, "out");
    csw::require(n >= 1, csw::ErrorCode::invalid_argument, "measure needs at least one support");
    const size_t len = c * d * d;
    std::vector<csw::Tensor3> supports;
    supports.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      supports.emplace_back(c, d, std::vector<double>(data + i * len, data + (i + 1) * len));
    }
    *out = new csw_measure{csw::EmpiricalMeasure(std::move(supports))};
  });
}

csw_status csw_measure_gaussian(size_t n, size_t c, size_t d, double mean, uint64_t seed,
                                csw_measure** out) {
  return guarded([&] {
    need(out, "out");
    *out = new csw_measure{csw::gaussian_measure(n, c, d, mean, seed)};
  });
}

csw_status csw_measure_read(const char* path, csw_measure** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new csw_measure{csw::read_tensor_file(path)};
  });
}

csw_status csw_measure_write(const csw_measure* measure, const char* path) {
  return guarded([&] {
    need(measure, "measure");
    need(path, "path");
    csw::write_tensor_file(path, measure->measure);
  });
}

csw_status csw_measure_shape(const csw_measure* measure, size_t* n, size_t* c, size_t* d) {
  return guarded([&] {
    need(measure, "measure");
    if (n) *n = measure->measure.size();
    if (c) *c = measure->measure.channels();
    if (d) *d = measure->measure.dim();
  });
}

csw_status csw_measure_copy_data(const csw_measure* measure, double* buffer, size_t length) {
  return guarded([&] {
    need(measure, "measure");
    need(buffer, "buffer");
    const auto& m = measure->measure;
    csw::require(length == m.size() * m.support_length(), csw::ErrorCode::invalid_shape,
                 "buffer length does not match measure size");
    for (size_t i = 0; i < m.size(); ++i) {
      auto v = m[i].values();
      std::copy(v.begin(), v.end(), buffer + i * v.size());
    }
  });
}

void csw_measure_free(csw_measure* measure) { delete measure; }

csw_status csw_distance(const csw_measure* a, const csw_measure* b, const csw_method_spec* spec,
                        unsigned threads, double* value, uint64_t* param_count) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(value, "value");
    const auto s = to_spec(spec);
    *value = csw::distance(a->measure, b->measure, s, threads);
    if (param_count) {
      *param_count = csw::projection_param_count(s, a->measure.channels(), a->measure.dim());
    }
  });
}

csw_status csw_schedule_create(const char* variant, size_t c, size_t d, size_t k, int nonlinear,
                               csw_schedule** out) {
  return guarded([&] {
    need(variant, "variant");
    need(out, "out");
    *out = new csw_schedule{
        csw::make_k_schedule(csw::parse_variant(variant), c, d, k, nonlinear != 0)};
  });
}

csw_status csw_schedule_num_layers(const csw_schedule* schedule, size_t* count) {
  return guarded([&] {
    need(schedule, "schedule");
    need(count, "count");
    *count = schedule->schedule.layers.size();
  });
}

csw_status csw_schedule_layer(const csw_schedule* schedule, size_t index, csw_layer_info* info) {
  return guarded([&] {
    need(schedule, "schedule");
    need(info, "info");
    const auto& layers = schedule->schedule.layers;
    csw::require(index < layers.size(), csw::ErrorCode::invalid_argument,
                 "layer index out of range");
    const auto& l = layers[index];
    *info = csw_layer_info{l.in_channels, l.out_channels, l.kernel,    l.stride,
                           l.dilation,    l.input_dim,    l.output_dim,
                           l.activation == csw::Activation::sigmoid ? 1 : 0};
  });
}

csw_status csw_schedule_param_count(const csw_schedule* schedule, uint64_t* count) {
  return guarded([&] {
    need(schedule, "schedule");
    need(count, "count");
    *count = csw::param_count(schedule->schedule);
  });
}

csw_status csw_schedule_mac_count(const csw_schedule* schedule, uint64_t* count) {
  return guarded([&] {
    need(schedule, "schedule");
    need(count, "count");
    *count = csw::slicer_mac_count(schedule->schedule);
  });
}

void csw_schedule_free(csw_schedule* schedule) { delete schedule; }

csw_status csw_method_costs(const csw_method_spec* spec, size_t c, size_t d,
                            uint64_t* param_count, uint64_t* mac_count) {
  return guarded([&] {
    const auto s = to_spec(spec);
    if (param_count) *param_count = csw::projection_param_count(s, c, d);
    if (mac_count) *mac_count = csw::projection_mac_count(s, c, d);
  });
}

csw_status csw_dataset_read_idx(const char* images_path, const char* labels_path,
                                const char* normalization, csw_dataset** out) {
  return guarded([&] {
    need(images_path, "images_path");
    need(labels_path, "labels_path");
    need(out, "out");
    const auto norm =
        normalization ? csw::parse_normalization(normalization) : csw::Normalization::unit;
    *out = new csw_dataset{csw::read_idx_dataset(images_path, labels_path, norm)};
  });
}

csw_status csw_dataset_info(const csw_dataset* dataset, size_t* count, size_t* num_classes,
                            size_t* min_class_count) {
  return guarded([&] {
    need(dataset, "dataset");
    if (count) *count = dataset->dataset.images.size();
    if (num_classes) *num_classes = dataset->dataset.classes().size();
    if (min_class_count) *min_class_count = csw::min_class_count(dataset->dataset);
  });
}

void csw_dataset_free(csw_dataset* dataset) { delete dataset; }

csw_status csw_compare(const csw_dataset* dataset, const csw_method_spec* spec, size_t per_class,
                       size_t repeats, unsigned threads, csw_report** out) {
  return guarded([&] {
    need(dataset, "dataset");
    need(out, "out");
    const auto s = to_spec(spec);
    *out = new csw_report{csw::compare_classes(dataset->dataset, s, per_class, repeats, threads),
                          {}};
  });
}

csw_status csw_report_dim(const csw_report* report, size_t* classes) {
  return guarded([&] {
    need(report, "report");
    need(classes, "classes");
    *classes = report->report.classes.size();
  });
}

csw_status csw_report_class(const csw_report* report, size_t index, int* label) {
  return guarded([&] {
    need(report, "report");
    need(label, "label");
    csw::require(index < report->report.classes.size(), csw::ErrorCode::invalid_argument,
                 "class index out of range");
    *label = report->report.classes[index];
  });
}

csw_status csw_report_entry(const csw_report* report, size_t row, size_t col, double* mean,
                            double* stddev) {
  return guarded([&] {
    need(report, "report");
    const auto& r = report->report;
    csw::require(row < r.matrix.size() && col < r.matrix.size(), csw::ErrorCode::invalid_argument,
                 "matrix index out of range");
    if (mean) *mean = r.matrix[row][col];
    if (stddev) *stddev = r.stddev ? (*r.stddev)[row][col] : 0.0;
  });
}

csw_status csw_report_runtime_ms(const csw_report* report, double* runtime_ms) {
  return guarded([&] {
    need(report, "report");
    need(runtime_ms, "runtime_ms");
    *runtime_ms = report->report.runtime_ms;
  });
}

csw_status csw_report_render(csw_report* report, const char* format, const char** text) {
  return guarded([&] {
    need(report, "report");
    need(format, "format");
    need(text, "text");
    const std::string f = format;
    if (f == "csv") {
      report->rendered = csw::report_to_csv(report->report);
    } else if (f == "json") {
      report->rendered = csw::report_to_json(report->report);
    } else {
      csw::fail(csw::ErrorCode::invalid_argument, "unknown report format '" + f + "'");
    }
    *text = report->rendered.c_str();
  });
}

void csw_report_free(csw_report* report) { delete report; }

}  // extern "C"
