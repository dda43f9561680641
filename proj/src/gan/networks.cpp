#include "lowrank_align/gan/networks.hpp"

#include "lowrank_align/error.hpp"

#include <string>

namespace lowrank_align::gan {

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, "generator config: " + what); };
  if (height < 4 || width < 4 || height % 4 != 0 || width % 4 != 0) fail("height and width must be positive multiples of 4");
  if (height / 4 < 2 || width / 4 < 2) fail("height and width must be at least 8");
  if (channels < 1 || set_size < 1 || base_width < 1) fail("channels, set_size and base_width must be positive");
  if (n_res_blocks < 1) fail("n_res_blocks must be >= 1");
}

void DiscriminatorConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, "discriminator config: " + what); };
  if (widths.empty() || widths.size() != strides.size()) fail("widths and strides must be non-empty and equal length");
  for (Index w : widths) {
    if (w < 1) fail("widths must be positive");
  }
  for (Index s : strides) {
    if (s < 1) fail("strides must be positive");
  }
  if (kernel < 1 || pad < 0 || channels < 1) fail("kernel and channels must be positive");
}

Index DiscriminatorConfig::receptive_field() const {
  Index field = 1;
  field = (field - 1) * 1 + kernel;  // scoring conv
  for (std::size_t i = strides.size(); i-- > 0;) field = (field - 1) * strides[i] + kernel;
  return field;
}

Index DiscriminatorConfig::output_size(Index input) const {
  Index size = input;
  auto step = [&](Index stride) {
    const Index span = size + 2 * pad - kernel;
    size = span < 0 ? 0 : span / stride + 1;
  };
  for (Index s : strides) {
    step(s);
    if (size < 1) return 0;
  }
  step(1);
  return size < 1 ? 0 : size;
}

template <typename Scalar>
ParameterSet<Scalar> Network<Scalar>::init_parameters(std::mt19937_64& rng, double stddev) const {
  ParameterSet<Scalar> params = layout_.zeros_like();
  for (Index i = 0; i < params.size(); ++i) {
    const std::string& name = params.name(i);
    if (name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0) continue;
    std::normal_distribution<double> normal(0.0, stddev);
    auto& values = params[i].values;
    for (Index k = 0; k < values.size(); ++k) values(k) = static_cast<Scalar>(normal(rng));
  }
  return params;
}

template <typename Scalar>
Generator<Scalar>::Generator(const GeneratorConfig& config) : config_(config) {
  config_.validate();
  auto& p = this->layout_;
  auto& body = this->body_;
  const Index w1 = config_.base_width;
  const Index w2 = 2 * w1;
  const Index w4 = 4 * w1;
  auto norm_relu = [&body] {
    body.add(std::make_unique<InstanceNorm<Scalar>>());
    body.add(std::make_unique<LeakyRelu<Scalar>>(0.0));
  };
  body.add(std::make_unique<Conv2d<Scalar>>(p, "enc0", config_.input_channels(), w1, 7, 1, 3, Padding::kReflect, false));
  norm_relu();
  body.add(std::make_unique<Conv2d<Scalar>>(p, "enc1", w1, w2, 3, 2, 1, Padding::kZero, false));
  norm_relu();
  body.add(std::make_unique<Conv2d<Scalar>>(p, "enc2", w2, w4, 3, 2, 1, Padding::kZero, false));
  norm_relu();
  for (Index i = 0; i < config_.n_res_blocks; ++i) {
    body.add(std::make_unique<ResidualBlock<Scalar>>(p, "res" + std::to_string(i), w4));
  }
  body.add(std::make_unique<ConvTranspose2d<Scalar>>(p, "dec0", w4, w2, false));
  norm_relu();
  body.add(std::make_unique<ConvTranspose2d<Scalar>>(p, "dec1", w2, w1, false));
  norm_relu();
  body.add(std::make_unique<Conv2d<Scalar>>(p, "out", w1, config_.channels, 7, 1, 3, Padding::kReflect, true));
  body.add(std::make_unique<Tanh<Scalar>>());
}

template <typename Scalar>
FeatureMap<Scalar> Generator<Scalar>::forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                                              LayerCache<Scalar>* tape) const {
  if (x.channels != config_.input_channels() || x.height != config_.height || x.width != config_.width) {
    throw Error(ErrorKind::kShapeMismatch,
                "generator expects " + std::to_string(config_.height) + "x" + std::to_string(config_.width) + "x" +
                    std::to_string(config_.input_channels()) + ", got " + std::to_string(x.height) + "x" +
                    std::to_string(x.width) + "x" + std::to_string(x.channels));
  }
  return this->body_.forward(params, x, tape);
}

template <typename Scalar>
Discriminator<Scalar>::Discriminator(const DiscriminatorConfig& config) : config_(config) {
  config_.validate();
  auto& p = this->layout_;
  auto& body = this->body_;
  Index in = config_.channels;
  for (std::size_t i = 0; i < config_.widths.size(); ++i) {
    const bool first = i == 0;
    body.add(std::make_unique<Conv2d<Scalar>>(p, "conv" + std::to_string(i), in, config_.widths[i], config_.kernel,
                                              config_.strides[i], config_.pad, Padding::kZero, first));
    if (!first) body.add(std::make_unique<InstanceNorm<Scalar>>());
    body.add(std::make_unique<LeakyRelu<Scalar>>(0.2));
    in = config_.widths[i];
  }
  body.add(std::make_unique<Conv2d<Scalar>>(p, "score", in, 1, config_.kernel, 1, config_.pad, Padding::kZero, true));
}

template <typename Scalar>
FeatureMap<Scalar> Discriminator<Scalar>::forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                                                  LayerCache<Scalar>* tape) const {
  const Index field = config_.receptive_field();
  if (x.height < field || x.width < field) {
    throw Error(ErrorKind::kInputTooSmall, "discriminator input " + std::to_string(x.height) + "x" +
                                               std::to_string(x.width) + " is smaller than its receptive field " +
                                               std::to_string(field));
  }
  if (x.channels != config_.channels) {
    throw Error(ErrorKind::kShapeMismatch, "discriminator expects " + std::to_string(config_.channels) + " channels");
  }
  return this->body_.forward(params, x, tape);
}

template class Network<float>;
template class Network<double>;
template class Generator<float>;
template class Generator<double>;
template class Discriminator<float>;
template class Discriminator<double>;

}  // namespace lowrank_align::gan
