#include "csw/tensor.hpp"

#include <cmath>
#include <string>

#include "csw/error.hpp"

namespace csw {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_shape: return "invalid_shape";
    case ErrorCode::format: return "format";
    case ErrorCode::io: return "io";
    case ErrorCode::capacity: return "capacity";
  }
  return "unknown";
}

Tensor3::Tensor3(std::size_t channels, std::size_t dim)
    : channels_(channels), dim_(dim), data_(channels * dim * dim, 0.0) {
  require(channels >= 1 && dim >= 1, ErrorCode::invalid_shape,
          "tensor channels and dim must be positive");
}

Tensor3::Tensor3(std::size_t channels, std::size_t dim, std::vector<double> data)
    : channels_(channels), dim_(dim), data_(std::move(data)) {
  require(channels >= 1 && dim >= 1, ErrorCode::invalid_shape,
          "tensor channels and dim must be positive");
  require(data_.size() == channels * dim * dim, ErrorCode::invalid_shape,
          "tensor data length " + std::to_string(data_.size()) + " does not match " +
              std::to_string(channels) + "x" + std::to_string(dim) + "x" +
              std::to_string(dim));
  require(all_finite(), ErrorCode::invalid_argument, "tensor contains non-finite values");
}

double Tensor3::squared_norm() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

double Tensor3::norm() const noexcept { return std::sqrt(squared_norm()); }

bool Tensor3::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> vectorize(const Tensor3& x) {
  auto v = x.values();
  return {v.begin(), v.end()};
}

Tensor3 devectorize(std::span<const double> v, std::size_t channels, std::size_t dim) {
  return Tensor3(channels, dim, std::vector<double>(v.begin(), v.end()));
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<Tensor3> supports)
    : supports_(std::move(supports)) {
  require(!supports_.empty(), ErrorCode::invalid_argument,
          "empirical measure needs at least one support");
  for (const auto& s : supports_) {
    require(s.same_shape(supports_.front()), ErrorCode::invalid_shape,
            "all supports of a measure must share one shape");
  }
}

}  // namespace csw
