#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace csw {

// c x d x d image tensor stored row-major as [channel][row][col].
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t channels, std::size_t dim);
  Tensor3(std::size_t channels, std::size_t dim, std::vector<double> data);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t h, std::size_t i, std::size_t j) noexcept {
    return data_[(h * dim_ + i) * dim_ + j];
  }
  double operator()(std::size_t h, std::size_t i, std::size_t j) const noexcept {
    return data_[(h * dim_ + i) * dim_ + j];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  double squared_norm() const noexcept;
  double norm() const noexcept;
  bool all_finite() const noexcept;
  bool same_shape(const Tensor3& other) const noexcept {
    return channels_ == other.channels_ && dim_ == other.dim_;
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// Row-major flattening; the inverse of devectorize.
std::vector<double> vectorize(const Tensor3& x);
Tensor3 devectorize(std::span<const double> v, std::size_t channels, std::size_t dim);

// Equally weighted supports sharing one (c, d) shape.
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(std::vector<Tensor3> supports);

  std::size_t size() const noexcept { return supports_.size(); }
  std::size_t channels() const noexcept { return supports_.front().channels(); }
  std::size_t dim() const noexcept { return supports_.front().dim(); }
  std::size_t support_length() const noexcept { return supports_.front().size(); }

  const Tensor3& operator[](std::size_t i) const noexcept { return supports_[i]; }
  const std::vector<Tensor3>& supports() const noexcept { return supports_; }

  bool same_shape(const EmpiricalMeasure& other) const noexcept {
    return supports_.front().same_shape(other.supports_.front());
  }

  friend bool operator==(const EmpiricalMeasure&, const EmpiricalMeasure&) = default;

 private:
  std::vector<Tensor3> supports_;
};

}  // namespace csw
