#pragma once

#include "lowrank_align/gan/layers.hpp"

#include <random>
#include <vector>

namespace lowrank_align::gan {

struct GeneratorConfig {
  Index height = 160;
  Index width = 160;
  Index channels = 1;  // per image
  Index set_size = 8;
  Index base_width = 64;
  Index n_res_blocks = 9;

  Index input_channels() const { return channels * set_size; }
  /// Throws kInvalidArgument (h, w must be divisible by 4).
  void validate() const;
};

/// PatchGAN: kernel-4 convs with the given widths and strides (pad 1, leaky
/// rectifier 0.2, instance norm on all but the first), then a 1-channel
/// stride-1 scoring conv. The defaults give a 70x70 receptive field.
struct DiscriminatorConfig {
  std::vector<Index> widths{64, 128, 256, 512};
  std::vector<Index> strides{2, 2, 2, 1};
  Index kernel = 4;
  Index pad = 1;
  Index channels = 1;

  void validate() const;
  /// Closed-form recursion r <- (r - 1) * stride + kernel, from the output back.
  Index receptive_field() const;
  /// Score-map side length for an input side length; 0 when too small.
  Index output_size(Index input) const;
};

template <typename Scalar>
class Network {
 public:
  virtual ~Network() = default;

  const ParameterSet<Scalar>& layout() const { return layout_; }

  /// Weights ~ N(0, stddev^2), biases zero. Draws are made in double so float
  /// and double networks start from the same values.
  ParameterSet<Scalar> init_parameters(std::mt19937_64& rng, double stddev = 0.02) const;

  /// `tape` may be null for inference.
  virtual FeatureMap<Scalar> forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                                     LayerCache<Scalar>* tape) const {
    return body_.forward(params, x, tape);
  }

  FeatureMap<Scalar> backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& tape,
                              const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const {
    return body_.backward(params, tape, dy, grads);
  }

  std::vector<std::uint8_t> signature(const LayerCache<Scalar>& tape) const {
    std::vector<std::uint8_t> out;
    body_.append_signature(tape, out);
    return out;
  }

 protected:
  ParameterSet<Scalar> layout_;
  Sequential<Scalar> body_;
};

/// Set-to-image generator: encoder (7x7 conv, two stride-2 3x3 convs),
/// residual transformer, decoder (two stride-1/2 transposed convs, 7x7 conv,
/// tanh). Widths base, 2*base, 4*base.
template <typename Scalar>
class Generator final : public Network<Scalar> {
 public:
  explicit Generator(const GeneratorConfig& config);

  const GeneratorConfig& config() const { return config_; }

  /// Input h x w x (c * n); output h x w x c. Throws kShapeMismatch.
  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                             LayerCache<Scalar>* tape) const override;

 private:
  GeneratorConfig config_;
};

template <typename Scalar>
class Discriminator final : public Network<Scalar> {
 public:
  explicit Discriminator(const DiscriminatorConfig& config);

  const DiscriminatorConfig& config() const { return config_; }

  /// Raw per-patch scores (1 x h' x w'). Throws kInputTooSmall when a side is
  /// below the receptive field.
  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                             LayerCache<Scalar>* tape) const override;

 private:
  DiscriminatorConfig config_;
};

}  // namespace lowrank_align::gan
