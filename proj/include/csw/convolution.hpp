#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "csw/tensor.hpp"

namespace csw {

// Shape of one single-output-channel convolution: a c_in x k x k kernel
// applied with stride s and dilation b, no padding.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t dilation = 1;
};

// d' = (d - b(k-1) - 1)/s + 1. Throws invalid_shape unless d' is a positive
// integer.
std::size_t output_dim(std::size_t d, std::size_t k, std::size_t stride, std::size_t dilation);

// Exact multiply-accumulate count d'^2 * c * k^2.
std::uint64_t mac_count(std::size_t d, const ConvSpec& spec);

// Y[0,i,j] = sum_h sum_i' sum_j' X[h, s*i + b*i', s*j + b*j'] * K[h, i', j'].
Tensor3 conv2d(const Tensor3& x, const Tensor3& kernel, std::size_t stride,
               std::size_t dilation);

// Gradients of <dy, conv2d(x, kernel)> w.r.t. kernel and x, added into the
// given accumulators. Either accumulator may be null.
void conv2d_backward(const Tensor3& x, const Tensor3& kernel, std::size_t stride,
                     std::size_t dilation, std::span<const double> dy, Tensor3* kernel_grad,
                     Tensor3* input_grad);

namespace detail {

// Raw loop shared by conv2d and by tests that instrument the scalar type.
// `out` must hold dout*dout zero-initialised entries. For every output entry
// the products are accumulated in (h, i', j') order.
template <class T>
void conv2d_accumulate(const T* x, std::size_t channels, std::size_t dim, const T* kernel,
                       std::size_t k, std::size_t stride, std::size_t dilation, T* out,
                       std::size_t dout) {
  for (std::size_t h = 0; h < channels; ++h) {
    const T* xh = x + h * dim * dim;
    for (std::size_t ki = 0; ki < k; ++ki) {
      for (std::size_t kj = 0; kj < k; ++kj) {
        const T w = kernel[(h * k + ki) * k + kj];
        for (std::size_t i = 0; i < dout; ++i) {
          const T* row = xh + (stride * i + dilation * ki) * dim + dilation * kj;
          T* orow = out + i * dout;
          for (std::size_t j = 0; j < dout; ++j) orow[j] += row[stride * j] * w;
        }
      }
    }
  }
}

}  // namespace detail
}  // namespace csw
