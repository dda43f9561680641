#pragma once

#include "lowrank_align/gan/tensor.hpp"

#include <memory>
#include <vector>

namespace lowrank_align::gan {

enum class Padding { kZero, kReflect };

/// Sliding-window geometry for one spatial axis pair.
struct ConvGeometry {
  Index in_height = 0;
  Index in_width = 0;
  Index kernel = 1;
  Index stride = 1;
  Index pad = 0;
  Padding padding = Padding::kZero;

  Index out_height() const { return (in_height + 2 * pad - kernel) / stride + 1; }
  Index out_width() const { return (in_width + 2 * pad - kernel) / stride + 1; }
};

/// Gathers sliding windows into a (channels * k * k) x (out_h * out_w) matrix.
template <typename Scalar>
Matrix<Scalar> im2col(const FeatureMap<Scalar>& x, const ConvGeometry& g);

/// Adjoint of im2col: scatter-adds columns back into a feature map.
template <typename Scalar>
FeatureMap<Scalar> col2im(const Matrix<Scalar>& cols, Index channels, const ConvGeometry& g);

/// Per-layer state saved by a training forward pass.
template <typename Scalar>
struct LayerCache {
  FeatureMap<Scalar> input;
  Matrix<Scalar> aux;
  Vector<Scalar> stats;
  std::vector<LayerCache> children;
};

template <typename Scalar>
class Layer {
 public:
  virtual ~Layer() = default;

  /// `cache` may be null for inference.
  virtual FeatureMap<Scalar> forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                                     LayerCache<Scalar>* cache) const = 0;

  /// Accumulates parameter gradients into `grads` and returns d loss / d input.
  virtual FeatureMap<Scalar> backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                                      const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const = 0;

  /// Appends the activation pattern of piecewise-linear units, used to spot
  /// finite-difference probes that cross a kink.
  virtual void append_signature(const LayerCache<Scalar>&, std::vector<std::uint8_t>&) const {}
};

template <typename Scalar>
using LayerPtr = std::unique_ptr<Layer<Scalar>>;

template <typename Scalar>
class Conv2d final : public Layer<Scalar> {
 public:
  /// Registers "<name>.weight" (out x in x k x k) and, if `bias`, "<name>.bias".
  Conv2d(ParameterSet<Scalar>& params, const std::string& name, Index in_channels, Index out_channels, Index kernel,
         Index stride, Index pad, Padding padding, bool bias);

  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                             LayerCache<Scalar>* cache) const override;
  FeatureMap<Scalar> backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                              const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const override;

 private:
  ConvGeometry geometry(const FeatureMap<Scalar>& x) const;
  Index in_channels_, out_channels_, kernel_, stride_, pad_;
  Padding padding_;
  Index weight_, bias_;
};

/// Fractionally strided convolution (stride 1/2, kernel 3, padding 1, output
/// padding 1): doubles the spatial size. Weight layout is in x out x k x k.
template <typename Scalar>
class ConvTranspose2d final : public Layer<Scalar> {
 public:
  ConvTranspose2d(ParameterSet<Scalar>& params, const std::string& name, Index in_channels, Index out_channels,
                  bool bias);

  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                             LayerCache<Scalar>* cache) const override;
  FeatureMap<Scalar> backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                              const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const override;

 private:
  ConvGeometry geometry(const FeatureMap<Scalar>& x) const;
  Index in_channels_, out_channels_;
  Index weight_, bias_;
};

/// Per-sample, per-channel normalization without affine parameters.
template <typename Scalar>
class InstanceNorm final : public Layer<Scalar> {
 public:
  static constexpr double kEpsilon = 1e-5;

  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                             LayerCache<Scalar>* cache) const override;
  FeatureMap<Scalar> backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                              const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const override;
};

/// max(x, slope * x); slope 0 is the plain rectifier.
template <typename Scalar>
class LeakyRelu final : public Layer<Scalar> {
 public:
  explicit LeakyRelu(double slope = 0.0) : slope_(slope) {}

  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                             LayerCache<Scalar>* cache) const override;
  FeatureMap<Scalar> backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                              const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const override;
  void append_signature(const LayerCache<Scalar>& cache, std::vector<std::uint8_t>& out) const override;

 private:
  double slope_;
};

template <typename Scalar>
class Tanh final : public Layer<Scalar> {
 public:
  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                             LayerCache<Scalar>* cache) const override;
  FeatureMap<Scalar> backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                              const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const override;
};

template <typename Scalar>
class Sequential : public Layer<Scalar> {
 public:
  void add(LayerPtr<Scalar> layer) { layers_.push_back(std::move(layer)); }
  Index size() const { return static_cast<Index>(layers_.size()); }

  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                             LayerCache<Scalar>* cache) const override;
  FeatureMap<Scalar> backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                              const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const override;
  void append_signature(const LayerCache<Scalar>& cache, std::vector<std::uint8_t>& out) const override;

 private:
  std::vector<LayerPtr<Scalar>> layers_;
};

/// x + body(x), body = reflect-pad 3x3 conv, IN, ReLU, reflect-pad 3x3 conv, IN.
template <typename Scalar>
class ResidualBlock final : public Layer<Scalar> {
 public:
  ResidualBlock(ParameterSet<Scalar>& params, const std::string& name, Index channels);

  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                             LayerCache<Scalar>* cache) const override;
  FeatureMap<Scalar> backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                              const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const override;
  void append_signature(const LayerCache<Scalar>& cache, std::vector<std::uint8_t>& out) const override;

 private:
  Sequential<Scalar> body_;
};

}  // namespace lowrank_align::gan
