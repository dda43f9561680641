#include "lowrank_align/gan/layers.hpp"

#include "lowrank_align/error.hpp"

#include <cmath>

namespace lowrank_align::gan {

namespace {

// Source index along one axis for every (kernel offset, output position);
// -1 marks a zero-padded sample.
std::vector<Index> axis_map(Index in, Index out, Index kernel, Index stride, Index pad, Padding padding) {
  std::vector<Index> map(kernel * out);
  for (Index k = 0; k < kernel; ++k) {
    for (Index o = 0; o < out; ++o) {
      Index pos = o * stride - pad + k;
      if (pos < 0 || pos >= in) {
        if (padding == Padding::kReflect) {
          pos = pos < 0 ? -pos : 2 * (in - 1) - pos;
        } else {
          pos = -1;
        }
      }
      map[k * out + o] = pos;
    }
  }
  return map;
}

void check_geometry(const ConvGeometry& g) {
  if (g.out_height() < 1 || g.out_width() < 1) {
    throw Error(ErrorKind::kInputTooSmall, "input " + std::to_string(g.in_height) + "x" + std::to_string(g.in_width) +
                                               " too small for kernel " + std::to_string(g.kernel));
  }
  if (g.padding == Padding::kReflect && (g.pad >= g.in_height || g.pad >= g.in_width)) {
    throw Error(ErrorKind::kInputTooSmall, "reflection padding needs pad < spatial size");
  }
}

}  // namespace

template <typename Scalar>
Matrix<Scalar> im2col(const FeatureMap<Scalar>& x, const ConvGeometry& g) {
  check_geometry(g);
  const Index oh = g.out_height();
  const Index ow = g.out_width();
  const Index k = g.kernel;
  const auto ymap = axis_map(g.in_height, oh, k, g.stride, g.pad, g.padding);
  const auto xmap = axis_map(g.in_width, ow, k, g.stride, g.pad, g.padding);
  Matrix<Scalar> cols(x.channels * k * k, oh * ow);
  for (Index c = 0; c < x.channels; ++c) {
    const Scalar* src = x.data.row(c).data();
    for (Index ky = 0; ky < k; ++ky) {
      for (Index kx = 0; kx < k; ++kx) {
        Scalar* dst = cols.row((c * k + ky) * k + kx).data();
        for (Index oy = 0; oy < oh; ++oy) {
          const Index sy = ymap[ky * oh + oy];
          Scalar* out = dst + oy * ow;
          if (sy < 0) {
            for (Index ox = 0; ox < ow; ++ox) out[ox] = Scalar(0);
            continue;
          }
          const Scalar* row = src + sy * g.in_width;
          const Index* xs = xmap.data() + kx * ow;
          for (Index ox = 0; ox < ow; ++ox) out[ox] = xs[ox] < 0 ? Scalar(0) : row[xs[ox]];
        }
      }
    }
  }
  return cols;
}

template <typename Scalar>
FeatureMap<Scalar> col2im(const Matrix<Scalar>& cols, Index channels, const ConvGeometry& g) {
  check_geometry(g);
  const Index oh = g.out_height();
  const Index ow = g.out_width();
  const Index k = g.kernel;
  const auto ymap = axis_map(g.in_height, oh, k, g.stride, g.pad, g.padding);
  const auto xmap = axis_map(g.in_width, ow, k, g.stride, g.pad, g.padding);
  FeatureMap<Scalar> x(channels, g.in_height, g.in_width);
  for (Index c = 0; c < channels; ++c) {
    Scalar* dst = x.data.row(c).data();
    for (Index ky = 0; ky < k; ++ky) {
      for (Index kx = 0; kx < k; ++kx) {
        const Scalar* src = cols.row((c * k + ky) * k + kx).data();
        for (Index oy = 0; oy < oh; ++oy) {
          const Index sy = ymap[ky * oh + oy];
          if (sy < 0) continue;
          Scalar* row = dst + sy * g.in_width;
          const Scalar* in = src + oy * ow;
          const Index* xs = xmap.data() + kx * ow;
          for (Index ox = 0; ox < ow; ++ox) {
            if (xs[ox] >= 0) row[xs[ox]] += in[ox];
          }
        }
      }
    }
  }
  return x;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
Conv2d<Scalar>::Conv2d(ParameterSet<Scalar>& params, const std::string& name, Index in_channels, Index out_channels,
                       Index kernel, Index stride, Index pad, Padding padding, bool bias)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      padding_(padding),
      weight_(params.add(name + ".weight", {out_channels, in_channels, kernel, kernel})),
      bias_(bias ? params.add(name + ".bias", {out_channels}) : -1) {}

template <typename Scalar>
ConvGeometry Conv2d<Scalar>::geometry(const FeatureMap<Scalar>& x) const {
  if (x.channels != in_channels_) {
    throw Error(ErrorKind::kShapeMismatch, "conv expects " + std::to_string(in_channels_) + " channels, got " +
                                               std::to_string(x.channels));
  }
  return {x.height, x.width, kernel_, stride_, pad_, padding_};
}

template <typename Scalar>
FeatureMap<Scalar> Conv2d<Scalar>::forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                                           LayerCache<Scalar>* cache) const {
  const ConvGeometry g = geometry(x);
  const Matrix<Scalar> cols = im2col(x, g);
  Eigen::Map<const Matrix<Scalar>> weight(params[weight_].values.data(), out_channels_, in_channels_ * kernel_ * kernel_);
  FeatureMap<Scalar> y;
  y.channels = out_channels_;
  y.height = g.out_height();
  y.width = g.out_width();
  y.data.noalias() = weight * cols;
  if (bias_ >= 0) y.data.colwise() += params[bias_].values;
  if (cache) cache->input = x;
  return y;
}

template <typename Scalar>
FeatureMap<Scalar> Conv2d<Scalar>::backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                                            const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const {
  const ConvGeometry g = geometry(cache.input);
  const Matrix<Scalar> cols = im2col(cache.input, g);
  const Index fan_in = in_channels_ * kernel_ * kernel_;
  Eigen::Map<const Matrix<Scalar>> weight(params[weight_].values.data(), out_channels_, fan_in);
  Eigen::Map<Matrix<Scalar>> dweight(grads[weight_].values.data(), out_channels_, fan_in);
  dweight.noalias() += dy.data * cols.transpose();
  if (bias_ >= 0) grads[bias_].values += dy.data.rowwise().sum();
  const Matrix<Scalar> dcols = weight.transpose() * dy.data;
  return col2im(dcols, in_channels_, g);
}

// ---------------------------------------------------------------------------

template <typename Scalar>
ConvTranspose2d<Scalar>::ConvTranspose2d(ParameterSet<Scalar>& params, const std::string& name, Index in_channels,
                                         Index out_channels, bool bias)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      weight_(params.add(name + ".weight", {in_channels, out_channels, 3, 3})),
      bias_(bias ? params.add(name + ".bias", {out_channels}) : -1) {}

template <typename Scalar>
ConvGeometry ConvTranspose2d<Scalar>::geometry(const FeatureMap<Scalar>& x) const {
  if (x.channels != in_channels_) {
    throw Error(ErrorKind::kShapeMismatch, "transposed conv expects " + std::to_string(in_channels_) +
                                               " channels, got " + std::to_string(x.channels));
  }
  // The stride-2 convolution whose adjoint this layer applies: 2H -> H.
  return {2 * x.height, 2 * x.width, 3, 2, 1, Padding::kZero};
}

template <typename Scalar>
FeatureMap<Scalar> ConvTranspose2d<Scalar>::forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                                                    LayerCache<Scalar>* cache) const {
  const ConvGeometry g = geometry(x);
  Eigen::Map<const Matrix<Scalar>> weight(params[weight_].values.data(), in_channels_, out_channels_ * 9);
  const Matrix<Scalar> cols = weight.transpose() * x.data;
  FeatureMap<Scalar> y = col2im(cols, out_channels_, g);
  if (bias_ >= 0) y.data.colwise() += params[bias_].values;
  if (cache) cache->input = x;
  return y;
}

template <typename Scalar>
FeatureMap<Scalar> ConvTranspose2d<Scalar>::backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                                                     const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const {
  const ConvGeometry g = geometry(cache.input);
  const Matrix<Scalar> dcols = im2col(dy, g);
  Eigen::Map<const Matrix<Scalar>> weight(params[weight_].values.data(), in_channels_, out_channels_ * 9);
  Eigen::Map<Matrix<Scalar>> dweight(grads[weight_].values.data(), in_channels_, out_channels_ * 9);
  dweight.noalias() += cache.input.data * dcols.transpose();
  if (bias_ >= 0) grads[bias_].values += dy.data.rowwise().sum();
  FeatureMap<Scalar> dx(in_channels_, cache.input.height, cache.input.width);
  dx.data.noalias() = weight * dcols;
  return dx;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
FeatureMap<Scalar> InstanceNorm<Scalar>::forward(const ParameterSet<Scalar>&, const FeatureMap<Scalar>& x,
                                                 LayerCache<Scalar>* cache) const {
  FeatureMap<Scalar> y = x;
  Vector<Scalar> inv_std(x.channels);
  for (Index c = 0; c < x.channels; ++c) {
    auto row = y.data.row(c).array();
    const Scalar mean = row.mean();
    row -= mean;
    const Scalar var = row.square().mean();
    inv_std(c) = Scalar(1) / std::sqrt(var + Scalar(kEpsilon));
    row *= inv_std(c);
  }
  if (cache) {
    cache->aux = y.data;
    cache->stats = inv_std;
  }
  return y;
}

template <typename Scalar>
FeatureMap<Scalar> InstanceNorm<Scalar>::backward(const ParameterSet<Scalar>&, const LayerCache<Scalar>& cache,
                                                  const FeatureMap<Scalar>& dy, ParameterSet<Scalar>&) const {
  FeatureMap<Scalar> dx = dy;
  for (Index c = 0; c < dy.channels; ++c) {
    const auto normalized = cache.aux.row(c).array();
    const auto g = dy.data.row(c).array();
    const Scalar mean_g = g.mean();
    const Scalar mean_gy = (g * normalized).mean();
    dx.data.row(c).array() = cache.stats(c) * (g - mean_g - normalized * mean_gy);
  }
  return dx;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
FeatureMap<Scalar> LeakyRelu<Scalar>::forward(const ParameterSet<Scalar>&, const FeatureMap<Scalar>& x,
                                              LayerCache<Scalar>* cache) const {
  FeatureMap<Scalar> y = x;
  const Scalar slope = static_cast<Scalar>(slope_);
  y.data = x.data.unaryExpr([slope](Scalar v) { return v > Scalar(0) ? v : slope * v; });
  if (cache) cache->input = x;
  return y;
}

template <typename Scalar>
FeatureMap<Scalar> LeakyRelu<Scalar>::backward(const ParameterSet<Scalar>&, const LayerCache<Scalar>& cache,
                                               const FeatureMap<Scalar>& dy, ParameterSet<Scalar>&) const {
  FeatureMap<Scalar> dx = dy;
  const Scalar slope = static_cast<Scalar>(slope_);
  dx.data = dy.data.binaryExpr(cache.input.data, [slope](Scalar g, Scalar v) { return v > Scalar(0) ? g : slope * g; });
  return dx;
}

template <typename Scalar>
void LeakyRelu<Scalar>::append_signature(const LayerCache<Scalar>& cache, std::vector<std::uint8_t>& out) const {
  const Scalar* v = cache.input.data.data();
  for (Index i = 0; i < cache.input.data.size(); ++i) out.push_back(v[i] > Scalar(0) ? 1 : 0);
}

template <typename Scalar>
FeatureMap<Scalar> Tanh<Scalar>::forward(const ParameterSet<Scalar>&, const FeatureMap<Scalar>& x,
                                         LayerCache<Scalar>* cache) const {
  FeatureMap<Scalar> y = x;
  y.data = x.data.array().tanh();
  if (cache) cache->aux = y.data;
  return y;
}

template <typename Scalar>
FeatureMap<Scalar> Tanh<Scalar>::backward(const ParameterSet<Scalar>&, const LayerCache<Scalar>& cache,
                                          const FeatureMap<Scalar>& dy, ParameterSet<Scalar>&) const {
  FeatureMap<Scalar> dx = dy;
  dx.data.array() *= Scalar(1) - cache.aux.array().square();
  return dx;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
FeatureMap<Scalar> Sequential<Scalar>::forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                                               LayerCache<Scalar>* cache) const {
  if (cache) cache->children.assign(layers_.size(), LayerCache<Scalar>{});
  FeatureMap<Scalar> out = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out = layers_[i]->forward(params, out, cache ? &cache->children[i] : nullptr);
  }
  return out;
}

template <typename Scalar>
FeatureMap<Scalar> Sequential<Scalar>::backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                                                const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const {
  FeatureMap<Scalar> grad = dy;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    grad = layers_[i]->backward(params, cache.children[i], grad, grads);
  }
  return grad;
}

template <typename Scalar>
void Sequential<Scalar>::append_signature(const LayerCache<Scalar>& cache, std::vector<std::uint8_t>& out) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->append_signature(cache.children[i], out);
}

template <typename Scalar>
ResidualBlock<Scalar>::ResidualBlock(ParameterSet<Scalar>& params, const std::string& name, Index channels) {
  body_.add(std::make_unique<Conv2d<Scalar>>(params, name + ".conv0", channels, channels, 3, 1, 1, Padding::kReflect, false));
  body_.add(std::make_unique<InstanceNorm<Scalar>>());
  body_.add(std::make_unique<LeakyRelu<Scalar>>(0.0));
  body_.add(std::make_unique<Conv2d<Scalar>>(params, name + ".conv1", channels, channels, 3, 1, 1, Padding::kReflect, false));
  body_.add(std::make_unique<InstanceNorm<Scalar>>());
}

template <typename Scalar>
FeatureMap<Scalar> ResidualBlock<Scalar>::forward(const ParameterSet<Scalar>& params, const FeatureMap<Scalar>& x,
                                                  LayerCache<Scalar>* cache) const {
  if (cache) cache->children.assign(1, LayerCache<Scalar>{});
  FeatureMap<Scalar> y = body_.forward(params, x, cache ? &cache->children[0] : nullptr);
  y.data += x.data;
  return y;
}

template <typename Scalar>
FeatureMap<Scalar> ResidualBlock<Scalar>::backward(const ParameterSet<Scalar>& params, const LayerCache<Scalar>& cache,
                                                   const FeatureMap<Scalar>& dy, ParameterSet<Scalar>& grads) const {
  FeatureMap<Scalar> dx = body_.backward(params, cache.children[0], dy, grads);
  dx.data += dy.data;
  return dx;
}

template <typename Scalar>
void ResidualBlock<Scalar>::append_signature(const LayerCache<Scalar>& cache, std::vector<std::uint8_t>& out) const {
  body_.append_signature(cache.children[0], out);
}

#define LOWRANK_ALIGN_INSTANTIATE(T)                                                  \
  template Matrix<T> im2col<T>(const FeatureMap<T>&, const ConvGeometry&);            \
  template FeatureMap<T> col2im<T>(const Matrix<T>&, Index, const ConvGeometry&);     \
  template class Conv2d<T>;                                                           \
  template class ConvTranspose2d<T>;                                                  \
  template class InstanceNorm<T>;                                                     \
  template class LeakyRelu<T>;                                                        \
  template class Tanh<T>;                                                             \
  template class Sequential<T>;                                                       \
  template class ResidualBlock<T>;

LOWRANK_ALIGN_INSTANTIATE(float)
LOWRANK_ALIGN_INSTANTIATE(double)

#undef LOWRANK_ALIGN_INSTANTIATE

}  // namespace lowrank_align::gan
