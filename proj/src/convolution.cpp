#include "csw/convolution.hpp"

#include <string>

#include "csw/error.hpp"

namespace csw {

std::size_t output_dim(std::size_t d, std::size_t k, std::size_t stride, std::size_t dilation) {
  require(d >= 1 && k >= 1 && stride >= 1 && dilation >= 1, ErrorCode::invalid_shape,
          "convolution arguments must be positive");
  const std::size_t span = dilation * (k - 1) + 1;
  require(span <= d, ErrorCode::invalid_shape,
          "dilated kernel extent " + std::to_string(span) + " exceeds input dim " +
              std::to_string(d));
  require((d - span) % stride == 0, ErrorCode::invalid_shape,
          "output dim is not integral for d=" + std::to_string(d) + " k=" + std::to_string(k) +
              " s=" + std::to_string(stride) + " b=" + std::to_string(dilation));
  return (d - span) / stride + 1;
}

std::uint64_t mac_count(std::size_t d, const ConvSpec& spec) {
  const std::uint64_t dout = output_dim(d, spec.kernel, spec.stride, spec.dilation);
  return dout * dout * spec.in_channels * spec.kernel * spec.kernel;
}

Tensor3 conv2d(const Tensor3& x, const Tensor3& kernel, std::size_t stride,
               std::size_t dilation) {
  require(kernel.channels() == x.channels(), ErrorCode::invalid_shape,
          "kernel has " + std::to_string(kernel.channels()) + " channels, input has " +
              std::to_string(x.channels()));
  const std::size_t dout = output_dim(x.dim(), kernel.dim(), stride, dilation);
  Tensor3 y(1, dout);
  detail::conv2d_accumulate(x.values().data(), x.channels(), x.dim(), kernel.values().data(),
                            kernel.dim(), stride, dilation, y.values().data(), dout);
  return y;
}

void conv2d_backward(const Tensor3& x, const Tensor3& kernel, std::size_t stride,
                     std::size_t dilation, std::span<const double> dy, Tensor3* kernel_grad,
                     Tensor3* input_grad) {
  require(kernel.channels() == x.channels(), ErrorCode::invalid_shape,
          "kernel/input channel mismatch");
  const std::size_t dim = x.dim();
  const std::size_t k = kernel.dim();
  const std::size_t dout = output_dim(dim, k, stride, dilation);
  require(dy.size() == dout * dout, ErrorCode::invalid_shape, "upstream gradient size mismatch");
  if (kernel_grad) {
    require(kernel_grad->same_shape(kernel), ErrorCode::invalid_shape,
            "kernel gradient shape mismatch");
  }
  if (input_grad) {
    require(input_grad->same_shape(x), ErrorCode::invalid_shape, "input gradient shape mismatch");
  }

  const double* xv = x.values().data();
  const double* kv = kernel.values().data();
  for (std::size_t h = 0; h < x.channels(); ++h) {
    for (std::size_t ki = 0; ki < k; ++ki) {
      for (std::size_t kj = 0; kj < k; ++kj) {
        const std::size_t kidx = (h * k + ki) * k + kj;
        double acc = 0.0;
        for (std::size_t i = 0; i < dout; ++i) {
          const std::size_t base = (h * dim + stride * i + dilation * ki) * dim + dilation * kj;
          for (std::size_t j = 0; j < dout; ++j) {
            const double g = dy[i * dout + j];
            if (kernel_grad) acc += g * xv[base + stride * j];
            if (input_grad) input_grad->values()[base + stride * j] += g * kv[kidx];
          }
        }
        if (kernel_grad) kernel_grad->values()[kidx] += acc;
      }
    }
  }
}

}  // namespace csw
