/*
 * C interface to the convolution sliced Wasserstein library.
 *
 * Every function returns a csw_status. On failure a description of the most
 * recent error on the calling thread is available from csw_last_error().
 * Handles are opaque; release each with its matching *_free function.
 */
#ifndef CSW_CSW_H_
#define CSW_CSW_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(CSW_BUILDING_LIBRARY)
#define CSW_API __declspec(dllexport)
#else
#define CSW_API __declspec(dllimport)
#endif
#else
#define CSW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum csw_status {
  CSW_OK = 0,
  CSW_ERR_INVALID_ARGUMENT = 1,
  CSW_ERR_INVALID_SHAPE = 2,
  CSW_ERR_FORMAT = 3,
  CSW_ERR_IO = 4,
  CSW_ERR_CAPACITY = 5,
  CSW_ERR_INTERNAL = 6
} csw_status;

typedef struct csw_measure csw_measure;
typedef struct csw_dataset csw_dataset;
typedef struct csw_schedule csw_schedule;
typedef struct csw_report csw_report;

/* Estimator configuration. `method` is one of sw, csw-b, csw-s, csw-d,
 * csw-full, ncsw-b, ncsw-s, ncsw-d, max-sw, max-csw-b, max-csw-s,
 * max-csw-d, prw, cprw-b, cprw-s, cprw-d, exact. */
typedef struct csw_method_spec {
  const char* method;
  double p;
  uint32_t L;
  uint32_t k;
  uint32_t steps;
  double learning_rate;
  uint64_t seed;
  int allow_unequal;
} csw_method_spec;

typedef struct csw_layer_info {
  size_t in_channels;
  size_t out_channels;
  size_t kernel;
  size_t stride;
  size_t dilation;
  size_t input_dim;
  size_t output_dim;
  int sigmoid;
} csw_layer_info;

CSW_API const char* csw_last_error(void);
CSW_API const char* csw_status_name(csw_status status);
CSW_API const char* csw_version(void);

/* Defaults: method csw-s, p 2, L 100, k 2, steps 100, lr 0.01, seed 42. */
CSW_API csw_status csw_method_spec_init(csw_method_spec* spec);
CSW_API csw_status csw_method_spec_validate(const csw_method_spec* spec);

/* Measures: n supports of shape c x d x d, row-major [n][c][d][d]. */
CSW_API csw_status csw_measure_create(size_t n, size_t c, size_t d, const double* data,
                                      csw_measure** out);
CSW_API csw_status csw_measure_gaussian(size_t n, size_t c, size_t d, double mean, uint64_t seed,
                                        csw_measure** out);
CSW_API csw_status csw_measure_read(const char* path, csw_measure** out);
CSW_API csw_status csw_measure_write(const csw_measure* measure, const char* path);
CSW_API csw_status csw_measure_shape(const csw_measure* measure, size_t* n, size_t* c, size_t* d);
CSW_API csw_status csw_measure_copy_data(const csw_measure* measure, double* buffer, size_t length);
CSW_API void csw_measure_free(csw_measure* measure);

/* Distance between two measures. `threads` = 0 uses every hardware thread.
 * `param_count` (optional) receives the stored reals per projection. */
CSW_API csw_status csw_distance(const csw_measure* a, const csw_measure* b,
                                const csw_method_spec* spec, unsigned threads, double* value,
                                uint64_t* param_count);

/* Slicer schedules. `variant` is base, stride, dilation or full. */
CSW_API csw_status csw_schedule_create(const char* variant, size_t c, size_t d, size_t k,
                                       int nonlinear, csw_schedule** out);
CSW_API csw_status csw_schedule_num_layers(const csw_schedule* schedule, size_t* count);
CSW_API csw_status csw_schedule_layer(const csw_schedule* schedule, size_t index,
                                      csw_layer_info* info);
CSW_API csw_status csw_schedule_param_count(const csw_schedule* schedule, uint64_t* count);
CSW_API csw_status csw_schedule_mac_count(const csw_schedule* schedule, uint64_t* count);
CSW_API void csw_schedule_free(csw_schedule* schedule);

/* Per-projection counts for a method on c x d x d inputs. */
CSW_API csw_status csw_method_costs(const csw_method_spec* spec, size_t c, size_t d,
                                    uint64_t* param_count, uint64_t* mac_count);

/* Labeled IDX datasets. `normalization` is none, unit or signed. */
CSW_API csw_status csw_dataset_read_idx(const char* images_path, const char* labels_path,
                                        const char* normalization, csw_dataset** out);
CSW_API csw_status csw_dataset_info(const csw_dataset* dataset, size_t* count,
                                    size_t* num_classes, size_t* min_class_count);
CSW_API void csw_dataset_free(csw_dataset* dataset);

/* Class-by-class distance matrix; per_class = 0 uses the smallest class. */
CSW_API csw_status csw_compare(const csw_dataset* dataset, const csw_method_spec* spec,
                               size_t per_class, size_t repeats, unsigned threads,
                               csw_report** out);
CSW_API csw_status csw_report_dim(const csw_report* report, size_t* classes);
CSW_API csw_status csw_report_class(const csw_report* report, size_t index, int* label);
/* `stddev` may be null; it is 0 when the report has a single repetition. */
CSW_API csw_status csw_report_entry(const csw_report* report, size_t row, size_t col,
                                    double* mean, double* stddev);
CSW_API csw_status csw_report_runtime_ms(const csw_report* report, double* runtime_ms);
/* Serialises as "csv" or "json". The string is owned by the report and
 * stays valid until the next call on it or csw_report_free. */
CSW_API csw_status csw_report_render(csw_report* report, const char* format, const char** text);
CSW_API void csw_report_free(csw_report* report);

#ifdef __cplusplus
}
#endif

#endif /* CSW_CSW_H_ */
