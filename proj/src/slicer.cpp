#include "csw/slicer.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "csw/convolution.hpp"
#include "csw/error.hpp"

namespace csw {

namespace {

struct SpatialStep {
  std::size_t kernel;
  std::size_t stride;
  std::size_t dilation;
};

// Spatial part of a schedule. Odd d gets a 2x2 reducer to d-1, then the even
// rule: with N maximal such that 2^(N-1) divides d and a = d / 2^(N-1),
// layers h = 1..N-1 halve the dim and a final a x a kernel reaches 1.
std::vector<SpatialStep> spatial_plan(SlicerVariant variant, std::size_t d) {
  if (variant == SlicerVariant::full) {
    require(d >= 1, ErrorCode::invalid_shape, "full slicer needs d >= 1");
    return {{d, 1, 1}};
  }
  require(d >= 2, ErrorCode::invalid_shape,
          "convolution slicers need d >= 2, got d=" + std::to_string(d));
  std::vector<SpatialStep> plan;
  if (d % 2 == 1) {
    plan.push_back({2, 1, 1});
    --d;
  }
  std::size_t half_powers = 0;  // N - 1
  while ((d >> half_powers) % 2 == 0) ++half_powers;
  const std::size_t a = d >> half_powers;
  for (std::size_t h = 1; h <= half_powers; ++h) {
    const std::size_t out = d >> h;
    switch (variant) {
      case SlicerVariant::base: plan.push_back({out + 1, 1, 1}); break;
      case SlicerVariant::stride: plan.push_back({2, 2, 1}); break;
      case SlicerVariant::dilation: plan.push_back({2, 1, out}); break;
      case SlicerVariant::full: break;
    }
  }
  plan.push_back({a, 1, 1});
  return plan;
}

double sigmoid(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

double activate(Activation a, double z) noexcept {
  return a == Activation::sigmoid ? sigmoid(z) : z;
}

void check_input(const SlicerSchedule& s, const Tensor3& x) {
  require(x.channels() == s.channels && x.dim() == s.dim, ErrorCode::invalid_shape,
          "slicer expects " + std::to_string(s.channels) + "x" + std::to_string(s.dim) + "x" +
              std::to_string(s.dim) + " input, got " + std::to_string(x.channels()) + "x" +
              std::to_string(x.dim()) + "x" + std::to_string(x.dim()));
}

// Applies one layer (all output channels) without activation.
Tensor3 layer_linear(const LayerSpec& layer, const std::vector<Tensor3>& kernels,
                     const Tensor3& in) {
  Tensor3 out(layer.out_channels, layer.output_dim);
  const std::size_t plane = layer.output_dim * layer.output_dim;
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    detail::conv2d_accumulate(in.values().data(), in.channels(), in.dim(),
                              kernels[o].values().data(), layer.kernel, layer.stride,
                              layer.dilation, out.values().data() + o * plane, layer.output_dim);
  }
  return out;
}

std::vector<double> forward(const KernelStack& stack, const Tensor3& x,
                            std::vector<Tensor3>* activations) {
  const SlicerSchedule& s = *stack.schedule;
  check_input(s, x);
  Tensor3 current = x;
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    const LayerSpec& layer = s.layers[l];
    Tensor3 next = layer_linear(layer, stack.kernels[l], current);
    if (layer.activation != Activation::none) {
      for (double& v : next.values()) v = activate(layer.activation, v);
    }
    if (activations) activations->push_back(std::move(current));
    current = std::move(next);
  }
  auto out = current.values();
  std::vector<double> result(out.begin(), out.end());
  if (activations) activations->push_back(std::move(current));
  return result;
}

}  // namespace

std::string_view variant_name(SlicerVariant v) noexcept {
  switch (v) {
    case SlicerVariant::base: return "base";
    case SlicerVariant::stride: return "stride";
    case SlicerVariant::dilation: return "dilation";
    case SlicerVariant::full: return "full";
  }
  return "unknown";
}

SlicerVariant parse_variant(std::string_view name) {
  if (name == "base" || name == "b") return SlicerVariant::base;
  if (name == "stride" || name == "s") return SlicerVariant::stride;
  if (name == "dilation" || name == "d") return SlicerVariant::dilation;
  if (name == "full") return SlicerVariant::full;
  fail(ErrorCode::invalid_argument, "unknown slicer variant '" + std::string(name) + "'");
}

SlicerSchedule make_k_schedule(SlicerVariant variant, std::size_t channels, std::size_t dim,
                               std::size_t k, bool nonlinear) {
  require(channels >= 1, ErrorCode::invalid_shape, "channels must be >= 1");
  require(k >= 1, ErrorCode::invalid_argument, "slicer output dimension k must be >= 1");
  SlicerSchedule s;
  s.variant = variant;
  s.nonlinear = nonlinear;
  s.k = k;
  s.channels = channels;
  s.dim = dim;
  const auto plan = spatial_plan(variant, dim);
  std::size_t current = dim;
  for (std::size_t l = 0; l < plan.size(); ++l) {
    LayerSpec layer;
    layer.in_channels = l == 0 ? channels : k;
    layer.out_channels = k;
    layer.kernel = plan[l].kernel;
    layer.stride = plan[l].stride;
    layer.dilation = plan[l].dilation;
    const bool last = l + 1 == plan.size();
    layer.activation = nonlinear && !last ? Activation::sigmoid : Activation::none;
    layer.input_dim = current;
    layer.output_dim = output_dim(current, layer.kernel, layer.stride, layer.dilation);
    current = layer.output_dim;
    s.layers.push_back(layer);
  }
  require(current == 1, ErrorCode::invalid_shape, "schedule does not reach spatial dim 1");
  return s;
}

SlicerSchedule schedule_base(std::size_t channels, std::size_t dim) {
  return make_k_schedule(SlicerVariant::base, channels, dim, 1);
}
SlicerSchedule schedule_stride(std::size_t channels, std::size_t dim) {
  return make_k_schedule(SlicerVariant::stride, channels, dim, 1);
}
SlicerSchedule schedule_dilation(std::size_t channels, std::size_t dim) {
  return make_k_schedule(SlicerVariant::dilation, channels, dim, 1);
}
SlicerSchedule schedule_full(std::size_t channels, std::size_t dim) {
  return make_k_schedule(SlicerVariant::full, channels, dim, 1);
}

std::shared_ptr<const SlicerSchedule> cached_schedule(SlicerVariant variant, std::size_t channels,
                                                      std::size_t dim, std::size_t k,
                                                      bool nonlinear) {
  using Key = std::tuple<int, std::size_t, std::size_t, std::size_t, bool>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const SlicerSchedule>> cache;
  const Key key{static_cast<int>(variant), channels, dim, k, nonlinear};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto built = std::make_shared<const SlicerSchedule>(
      make_k_schedule(variant, channels, dim, k, nonlinear));
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(built)).first->second;
}

SlicerSchedule with_hidden_activation(SlicerSchedule schedule, Activation activation) {
  for (std::size_t l = 0; l + 1 < schedule.layers.size(); ++l) {
    schedule.layers[l].activation = activation;
  }
  return schedule;
}

std::uint64_t param_count(const SlicerSchedule& schedule) {
  std::uint64_t total = 0;
  for (const auto& l : schedule.layers) {
    total += std::uint64_t{l.out_channels} * l.in_channels * l.kernel * l.kernel;
  }
  return total;
}

std::uint64_t slicer_mac_count(const SlicerSchedule& schedule) {
  std::uint64_t total = 0;
  for (const auto& l : schedule.layers) {
    total += l.out_channels *
             mac_count(l.input_dim, ConvSpec{l.in_channels, l.kernel, l.stride, l.dilation});
  }
  return total;
}

KernelSet zero_kernel_set(const SlicerSchedule& schedule) {
  KernelSet set;
  for (const auto& l : schedule.layers) {
    set.emplace_back(l.out_channels, Tensor3(l.in_channels, l.kernel));
  }
  return set;
}

KernelStack sample_kernel_stack(std::shared_ptr<const SlicerSchedule> schedule, Substream& rng) {
  require(schedule != nullptr, ErrorCode::invalid_argument, "null schedule");
  KernelStack stack{std::move(schedule), {}};
  for (const auto& l : stack.schedule->layers) {
    auto& layer = stack.kernels.emplace_back();
    layer.reserve(l.out_channels);
    for (std::size_t o = 0; o < l.out_channels; ++o) {
      layer.push_back(sample_unit_tensor(l.in_channels, l.kernel, rng));
    }
  }
  return stack;
}

std::vector<double> apply_slicer(const KernelStack& stack, const Tensor3& x) {
  return forward(stack, x, nullptr);
}

double apply_slicer_scalar(const KernelStack& stack, const Tensor3& x) {
  require(stack.schedule->k == 1, ErrorCode::invalid_argument, "scalar slicer requires k = 1");
  return forward(stack, x, nullptr).front();
}

std::vector<double> project(const KernelStack& stack, const EmpiricalMeasure& measure) {
  require(stack.schedule->k == 1, ErrorCode::invalid_argument, "scalar projection requires k = 1");
  std::vector<double> out;
  out.reserve(measure.size());
  for (const auto& x : measure.supports()) out.push_back(forward(stack, x, nullptr).front());
  return out;
}

std::vector<double> project_k(const KernelStack& stack, const EmpiricalMeasure& measure) {
  std::vector<double> out;
  out.reserve(measure.size() * stack.schedule->k);
  for (const auto& x : measure.supports()) {
    auto y = forward(stack, x, nullptr);
    out.insert(out.end(), y.begin(), y.end());
  }
  return out;
}

std::vector<double> slicer_vjp(const KernelStack& stack, const Tensor3& x,
                               std::span<const double> upstream, KernelSet& grad) {
  const SlicerSchedule& s = *stack.schedule;
  require(upstream.size() == s.k, ErrorCode::invalid_shape, "upstream size must equal k");
  std::vector<Tensor3> acts;
  acts.reserve(s.layers.size() + 1);
  auto value = forward(stack, x, &acts);

  // delta holds d objective / d (output of layer l after activation).
  Tensor3 delta(s.k, 1, std::vector<double>(upstream.begin(), upstream.end()));
  for (std::size_t l = s.layers.size(); l-- > 0;) {
    const LayerSpec& layer = s.layers[l];
    if (layer.activation == Activation::sigmoid) {
      auto y = acts[l + 1].values();
      auto dv = delta.values();
      for (std::size_t i = 0; i < dv.size(); ++i) dv[i] *= y[i] * (1.0 - y[i]);
    }
    const std::size_t plane = layer.output_dim * layer.output_dim;
    Tensor3 next_delta = l > 0 ? Tensor3(layer.in_channels, layer.input_dim) : Tensor3();
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
      conv2d_backward(acts[l], stack.kernels[l][o], layer.stride, layer.dilation,
                      delta.values().subspan(o * plane, plane), &grad[l][o],
                      l > 0 ? &next_delta : nullptr);
    }
    if (l > 0) delta = std::move(next_delta);
  }
  return value;
}

SlicerGradient apply_slicer_with_grad(const KernelStack& stack, const Tensor3& x) {
  require(stack.schedule->k == 1, ErrorCode::invalid_argument,
          "apply_slicer_with_grad requires k = 1");
  SlicerGradient g;
  g.kernels = zero_kernel_set(*stack.schedule);
  const double one = 1.0;
  g.value = slicer_vjp(stack, x, std::span<const double>(&one, 1), g.kernels).front();
  return g;
}

}  // namespace csw
