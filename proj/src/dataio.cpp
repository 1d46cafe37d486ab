#include "csw/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csw/error.hpp"
#include "csw/random.hpp"

namespace csw {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
constexpr char kTensorMagic[4] = {'C', 'S', 'W', 'T'};
constexpr std::uint32_t kTensorVersion = 1;

std::uint32_t read_be32(std::string_view bytes, std::size_t offset) {
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::uint32_t read_le32(std::string_view bytes, std::size_t offset) {
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
         (std::uint32_t{b[3]} << 24);
}

void append_le32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t to_le64_bits(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return bits;
}

void append_le64(std::string& out, double v) {
  const std::uint64_t bits = to_le64_bits(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double read_le64(std::string_view bytes, std::size_t offset) {
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t{b[i]} << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

// a*b*c without wrap-around; nullopt on overflow.
std::optional<std::uint64_t> checked_product(std::initializer_list<std::uint64_t> factors) {
  std::uint64_t acc = 1;
  for (std::uint64_t f : factors) {
    if (f != 0 && acc > std::numeric_limits<std::uint64_t>::max() / f) return std::nullopt;
    acc *= f;
  }
  return acc;
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view normalization_name(Normalization n) noexcept {
  switch (n) {
    case Normalization::none: return "none";
    case Normalization::unit: return "unit";
    case Normalization::signed_unit: return "signed";
  }
  return "unknown";
}

Normalization parse_normalization(std::string_view name) {
  if (name == "none") return Normalization::none;
  if (name == "unit") return Normalization::unit;
  if (name == "signed") return Normalization::signed_unit;
  fail(ErrorCode::invalid_argument, "unknown normalization '" + std::string(name) + "'");
}

double normalize_pixel(std::uint8_t byte, Normalization n) noexcept {
  switch (n) {
    case Normalization::none: return byte;
    case Normalization::unit: return byte / 255.0;
    case Normalization::signed_unit: return byte / 127.5 - 1.0;
  }
  return byte;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  require(!in.bad(), ErrorCode::io, "error reading '" + path.string() + "'");
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  require(static_cast<bool>(out), ErrorCode::io, "error writing '" + path.string() + "'");
}

std::vector<Tensor3> decode_idx_images(std::string_view bytes, Normalization normalization) {
  require(bytes.size() >= 16, ErrorCode::format, "IDX image header truncated");
  require(read_be32(bytes, 0) == kIdxImagesMagic, ErrorCode::format,
          "bad IDX image magic (expected 00 00 08 03)");
  const std::uint64_t count = read_be32(bytes, 4);
  const std::uint64_t rows = read_be32(bytes, 8);
  const std::uint64_t cols = read_be32(bytes, 12);
  require(rows >= 1 && rows == cols, ErrorCode::format, "IDX images must be square and non-empty");
  const auto payload = checked_product({count, rows, cols});
  require(payload.has_value(), ErrorCode::format, "IDX image dimensions overflow");
  require(bytes.size() - 16 >= *payload, ErrorCode::format,
          "IDX image payload truncated: header declares " + std::to_string(count) + " images");
  std::vector<Tensor3> images;
  images.reserve(count);
  const auto* px = reinterpret_cast<const unsigned char*>(bytes.data() + 16);
  const std::size_t plane = rows * cols;
  for (std::uint64_t i = 0; i < count; ++i) {
    Tensor3 t(1, rows);
    auto v = t.values();
    for (std::size_t j = 0; j < plane; ++j) v[j] = normalize_pixel(px[i * plane + j], normalization);
    images.push_back(std::move(t));
  }
  return images;
}

std::vector<int> decode_idx_labels(std::string_view bytes) {
  require(bytes.size() >= 8, ErrorCode::format, "IDX label header truncated");
  require(read_be32(bytes, 0) == kIdxLabelsMagic, ErrorCode::format,
          "bad IDX label magic (expected 00 00 08 01)");
  const std::uint64_t count = read_be32(bytes, 4);
  require(bytes.size() - 8 >= count, ErrorCode::format,
          "IDX label payload truncated: header declares " + std::to_string(count) + " labels");
  std::vector<int> labels(count);
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + 8);
  for (std::uint64_t i = 0; i < count; ++i) labels[i] = b[i];
  return labels;
}

std::vector<Tensor3> read_idx_images(const std::filesystem::path& path,
                                     Normalization normalization) {
  return decode_idx_images(read_file(path), normalization);
}

std::vector<int> read_idx_labels(const std::filesystem::path& path) {
  return decode_idx_labels(read_file(path));
}

std::vector<int> LabeledDataset::classes() const {
  std::set<int> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

LabeledDataset make_dataset(std::vector<Tensor3> images, std::vector<int> labels,
                            Normalization normalization) {
  require(images.size() == labels.size(), ErrorCode::format,
          "image count " + std::to_string(images.size()) + " differs from label count " +
              std::to_string(labels.size()));
  require(!images.empty(), ErrorCode::format, "dataset is empty");
  for (const auto& img : images) {
    require(img.same_shape(images.front()), ErrorCode::invalid_shape,
            "dataset images differ in shape");
  }
  for (int l : labels) require(l >= 0, ErrorCode::format, "negative label");
  return LabeledDataset{std::move(images), std::move(labels), normalization};
}

LabeledDataset read_idx_dataset(const std::filesystem::path& images,
                                const std::filesystem::path& labels,
                                Normalization normalization) {
  return make_dataset(read_idx_images(images, normalization), read_idx_labels(labels),
                      normalization);
}

std::string encode_tensor_container(const EmpiricalMeasure& measure) {
  std::string out(kTensorMagic, 4);
  append_le32(out, kTensorVersion);
  append_le32(out, static_cast<std::uint32_t>(measure.size()));
  append_le32(out, static_cast<std::uint32_t>(measure.channels()));
  append_le32(out, static_cast<std::uint32_t>(measure.dim()));
  append_le32(out, static_cast<std::uint32_t>(measure.dim()));
  out.reserve(out.size() + measure.size() * measure.support_length() * 8);
  for (const auto& x : measure.supports()) {
    for (double v : x.values()) append_le64(out, v);
  }
  return out;
}

EmpiricalMeasure decode_tensor_container(std::string_view bytes) {
  require(bytes.size() >= 24, ErrorCode::format, "tensor container header truncated");
  require(std::memcmp(bytes.data(), kTensorMagic, 4) == 0, ErrorCode::format,
          "bad tensor container magic (expected CSWT)");
  const std::uint32_t version = read_le32(bytes, 4);
  require(version == kTensorVersion, ErrorCode::format,
          "unsupported tensor container version " + std::to_string(version));
  const std::uint64_t n = read_le32(bytes, 8);
  const std::uint64_t c = read_le32(bytes, 12);
  const std::uint64_t d1 = read_le32(bytes, 16);
  const std::uint64_t d2 = read_le32(bytes, 20);
  require(n >= 1, ErrorCode::format, "tensor container holds no supports");
  require(c >= 1 && d1 >= 1 && d1 == d2, ErrorCode::format,
          "tensor container shape must be c x d x d with positive sizes");
  const auto count = checked_product({n, c, d1, d2, 8});
  require(count.has_value() && bytes.size() - 24 == *count, ErrorCode::format,
          "tensor container payload does not match its declared shape");
  const std::size_t len = c * d1 * d2;
  std::vector<Tensor3> supports;
  supports.reserve(n);
  std::size_t offset = 24;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<double> data(len);
    for (std::size_t j = 0; j < len; ++j, offset += 8) data[j] = read_le64(bytes, offset);
    supports.emplace_back(c, d1, std::move(data));
  }
  return EmpiricalMeasure(std::move(supports));
}

EmpiricalMeasure read_tensor_file(const std::filesystem::path& path) {
  return decode_tensor_container(read_file(path));
}

void write_tensor_file(const std::filesystem::path& path, const EmpiricalMeasure& measure) {
  write_file(path, encode_tensor_container(measure));
}

std::size_t min_class_count(const LabeledDataset& dataset) {
  std::map<int, std::size_t> counts;
  for (int l : dataset.labels) ++counts[l];
  std::size_t m = std::numeric_limits<std::size_t>::max();
  for (const auto& [label, count] : counts) m = std::min(m, count);
  return counts.empty() ? 0 : m;
}

std::vector<ClassSplit> split_by_class(const LabeledDataset& dataset, std::size_t per_class,
                                       std::uint64_t seed) {
  require(per_class >= 2, ErrorCode::invalid_argument, "per_class must be >= 2");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < dataset.labels.size(); ++i) members[dataset.labels[i]].push_back(i);
  const RandomSource rng(seed);
  std::vector<ClassSplit> out;
  for (auto& [label, idx] : members) {
    require(idx.size() >= per_class, ErrorCode::invalid_argument,
            "class " + std::to_string(label) + " has " + std::to_string(idx.size()) +
                " images, fewer than per_class=" + std::to_string(per_class));
    auto sub = rng.substream(static_cast<std::uint64_t>(label));
    std::shuffle(idx.begin(), idx.end(), sub.engine());
    idx.resize(per_class);
    const std::size_t half = per_class / 2;
    auto gather = [&](std::size_t from, std::size_t to) {
      std::vector<Tensor3> s;
      s.reserve(to - from);
      for (std::size_t i = from; i < to; ++i) s.push_back(dataset.images[idx[i]]);
      return EmpiricalMeasure(std::move(s));
    };
    out.push_back(ClassSplit{label, idx, gather(0, per_class), gather(0, half),
                             gather(half, 2 * half)});
  }
  return out;
}

std::string report_to_csv(const DistanceMatrixReport& report) {
  std::string out;
  auto block = [&](const char* head, const std::vector<std::vector<double>>& m) {
    out += head;
    for (int c : report.classes) out += "," + std::to_string(c);
    out += "\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
      out += std::to_string(report.classes[i]);
      for (double v : m[i]) out += "," + format_g17(v);
      out += "\n";
    }
  };
  block("class", report.matrix);
  if (report.stddev) {
    out += "\n";
    block("std", *report.stddev);
  }
  return out;
}

std::string report_to_json(const DistanceMatrixReport& report) {
  const MethodSpec& s = report.spec;
  const bool has_variant =
      s.family == Family::csw || s.family == Family::max_csw || s.family == Family::cprw;
  nlohmann::ordered_json j;
  j["method"] = method_name(s);
  j["variant"] = has_variant ? nlohmann::ordered_json(std::string(variant_name(s.variant)))
                             : nlohmann::ordered_json(nullptr);
  j["nonlinear"] = s.nonlinear;
  j["p"] = s.p;
  j["L"] = s.L;
  j["k"] = s.k;
  j["steps"] = s.steps;
  j["lr"] = s.learning_rate;
  j["seed"] = s.seed;
  j["normalization"] = std::string(normalization_name(report.normalization));
  j["param_count"] = report.param_count;
  j["runtime_ms"] = report.runtime_ms;
  j["matrix"] = report.matrix;
  j["classes"] = report.classes;
  j["per_class"] = report.per_class;
  j["repeats"] = report.repeats;
  if (report.stddev) j["std"] = *report.stddev;
  return j.dump(2) + "\n";
}

}  // namespace csw
