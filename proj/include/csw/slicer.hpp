#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csw/random.hpp"
#include "csw/tensor.hpp"

namespace csw {

// `full` is the degenerate one-layer slicer with a c x d x d kernel, i.e.
// conventional vectorize-and-project slicing written as a convolution.
enum class SlicerVariant { base, stride, dilation, full };

enum class Activation { none, sigmoid, identity };

std::string_view variant_name(SlicerVariant v) noexcept;
SlicerVariant parse_variant(std::string_view name);

struct LayerSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t dilation = 1;
  Activation activation = Activation::none;
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
};

struct SlicerSchedule {
  SlicerVariant variant = SlicerVariant::base;
  bool nonlinear = false;
  std::size_t k = 1;
  std::size_t channels = 1;
  std::size_t dim = 1;
  std::vector<LayerSpec> layers;
};

// Scalar (k = 1) linear schedules.
SlicerSchedule schedule_base(std::size_t channels, std::size_t dim);
SlicerSchedule schedule_stride(std::size_t channels, std::size_t dim);
SlicerSchedule schedule_dilation(std::size_t channels, std::size_t dim);
SlicerSchedule schedule_full(std::size_t channels, std::size_t dim);

// General builder. Layer 1 maps c -> k channels, later layers k -> k. With
// `nonlinear` every layer but the last is followed by a sigmoid.
SlicerSchedule make_k_schedule(SlicerVariant variant, std::size_t channels, std::size_t dim,
                               std::size_t k, bool nonlinear = false);

// Process-wide memo of make_k_schedule; schedules are pure structure.
std::shared_ptr<const SlicerSchedule> cached_schedule(SlicerVariant variant, std::size_t channels,
                                                      std::size_t dim, std::size_t k,
                                                      bool nonlinear);

// Copy of `schedule` with every hidden-layer activation replaced.
SlicerSchedule with_hidden_activation(SlicerSchedule schedule, Activation activation);

std::uint64_t param_count(const SlicerSchedule& schedule);
std::uint64_t slicer_mac_count(const SlicerSchedule& schedule);

// kernels[layer][out_channel] has shape in_channels x kernel x kernel and
// unit Frobenius norm.
using KernelSet = std::vector<std::vector<Tensor3>>;

struct KernelStack {
  std::shared_ptr<const SlicerSchedule> schedule;
  KernelSet kernels;
};

KernelStack sample_kernel_stack(std::shared_ptr<const SlicerSchedule> schedule, Substream& rng);

// Zero tensors shaped like the kernels of `schedule`.
KernelSet zero_kernel_set(const SlicerSchedule& schedule);

// Output point in R^k.
std::vector<double> apply_slicer(const KernelStack& stack, const Tensor3& x);
double apply_slicer_scalar(const KernelStack& stack, const Tensor3& x);

// Scalar projection of every support (k = 1).
std::vector<double> project(const KernelStack& stack, const EmpiricalMeasure& measure);
// Row-major n x k projection of every support.
std::vector<double> project_k(const KernelStack& stack, const EmpiricalMeasure& measure);

struct SlicerGradient {
  double value = 0.0;
  KernelSet kernels;
};

// Value and d value / d kernel entry for a k = 1 slicer (reverse mode).
SlicerGradient apply_slicer_with_grad(const KernelStack& stack, const Tensor3& x);

// Vector-Jacobian product: adds upstream^T d S(x) / d kernels into `grad`
// and returns S(x).
std::vector<double> slicer_vjp(const KernelStack& stack, const Tensor3& x,
                               std::span<const double> upstream, KernelSet& grad);

}  // namespace csw
