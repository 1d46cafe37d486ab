#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csw/distances.hpp"
#include "csw/tensor.hpp"

namespace csw {

// Pixel byte mapping: none keeps 0..255, unit maps to [0,1], signed to [-1,1].
enum class Normalization { none, unit, signed_unit };

std::string_view normalization_name(Normalization n) noexcept;
Normalization parse_normalization(std::string_view name);
double normalize_pixel(std::uint8_t byte, Normalization n) noexcept;

// IDX (big-endian) readers. Images must be square; each becomes 1 x d x d.
std::vector<Tensor3> read_idx_images(const std::filesystem::path& path,
                                     Normalization normalization = Normalization::unit);
std::vector<int> read_idx_labels(const std::filesystem::path& path);

// In-memory decoders behind the file readers.
std::vector<Tensor3> decode_idx_images(std::string_view bytes, Normalization normalization);
std::vector<int> decode_idx_labels(std::string_view bytes);

struct LabeledDataset {
  std::vector<Tensor3> images;
  std::vector<int> labels;
  Normalization normalization = Normalization::unit;

  // Sorted distinct labels.
  std::vector<int> classes() const;
};

LabeledDataset make_dataset(std::vector<Tensor3> images, std::vector<int> labels,
                            Normalization normalization);
LabeledDataset read_idx_dataset(const std::filesystem::path& images,
                                const std::filesystem::path& labels,
                                Normalization normalization = Normalization::unit);

// "CSWT" container: magic, u32 version = 1, u32 n, c, d1, d2, then n*c*d1*d2
// little-endian f64 values.
EmpiricalMeasure read_tensor_file(const std::filesystem::path& path);
void write_tensor_file(const std::filesystem::path& path, const EmpiricalMeasure& measure);
EmpiricalMeasure decode_tensor_container(std::string_view bytes);
std::string encode_tensor_container(const EmpiricalMeasure& measure);

// One class's sample: `indices` are dataset positions of the `per_class`
// chosen images; half_a and half_b are disjoint halves of that selection.
struct ClassSplit {
  int label = 0;
  std::vector<std::size_t> indices;
  EmpiricalMeasure full;
  EmpiricalMeasure half_a;
  EmpiricalMeasure half_b;
};

std::vector<ClassSplit> split_by_class(const LabeledDataset& dataset, std::size_t per_class,
                                       std::uint64_t seed);

// Smallest class population.
std::size_t min_class_count(const LabeledDataset& dataset);

struct DistanceMatrixReport {
  MethodSpec spec;
  Normalization normalization = Normalization::unit;
  std::vector<int> classes;
  std::vector<std::vector<double>> matrix;
  std::optional<std::vector<std::vector<double>>> stddev;
  std::size_t per_class = 0;
  std::size_t repeats = 1;
  double runtime_ms = 0.0;
  std::uint64_t param_count = 0;
};

std::string report_to_csv(const DistanceMatrixReport& report);
std::string report_to_json(const DistanceMatrixReport& report);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace csw
