#include "lowrank_align/gan/data.hpp"

#include "lowrank_align/error.hpp"

#include <algorithm>
#include <limits>

namespace lowrank_align::gan {

template <typename Scalar>
FeatureMap<Scalar> concat_channels(const ImageSet& set, Index set_size) {
  if (set.size() != set_size) {
    throw Error(ErrorKind::kSetSizeMismatch, "expected " + std::to_string(set_size) + " images per set, got " +
                                                 std::to_string(set.size()));
  }
  set.validate();
  const Index c = set.channels();
  FeatureMap<Scalar> out(c * set_size, set.height(), set.width());
  for (Index j = 0; j < set_size; ++j) {
    const Image& image = set.images[j];
    for (Index ch = 0; ch < c; ++ch) {
      out.data.row(j * c + ch) = image.pixels.segment(ch * image.plane(), image.plane()).transpose().template cast<Scalar>();
    }
  }
  return out;
}

template <typename Scalar>
FeatureMap<Scalar> to_feature_map(const Image& image) {
  FeatureMap<Scalar> out(image.channels, image.height, image.width);
  for (Index ch = 0; ch < image.channels; ++ch) {
    out.data.row(ch) = image.pixels.segment(ch * image.plane(), image.plane()).transpose().template cast<Scalar>();
  }
  return out;
}

template <typename Scalar>
Image to_image(const FeatureMap<Scalar>& map) {
  Image image(map.height, map.width, map.channels);
  for (Index ch = 0; ch < map.channels; ++ch) {
    image.pixels.segment(ch * image.plane(), image.plane()) = map.data.row(ch).transpose().template cast<double>();
  }
  return image;
}

template <typename Scalar>
FeatureMap<Scalar> channel_slice(const FeatureMap<Scalar>& map, Index first, Index count) {
  FeatureMap<Scalar> out(count, map.height, map.width);
  out.data = map.data.middleRows(first, count);
  return out;
}

RangeMap fit_range_map(const ImageSet& set) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Image& image : set.images) {
    lo = std::min(lo, image.pixels.minCoeff());
    hi = std::max(hi, image.pixels.maxCoeff());
  }
  RangeMap map;
  if (!(hi > lo)) {
    map.scale = 1.0;
    map.offset = -lo;
    return map;
  }
  map.scale = 2.0 / (hi - lo);
  map.offset = -1.0 - map.scale * lo;
  return map;
}

template <typename Scalar>
PreparedSet<Scalar> prepare_set(const ImageSet& set, Index set_size) {
  PreparedSet<Scalar> out;
  out.input = concat_channels<Scalar>(set, set_size);
  out.range = fit_range_map(set);
  const Scalar scale = static_cast<Scalar>(out.range.scale);
  const Scalar offset = static_cast<Scalar>(out.range.offset);
  out.input.data = (out.input.data.array() * scale + offset).matrix();
  return out;
}

template <typename Scalar>
Image export_image(const FeatureMap<Scalar>& generated, const RangeMap& range) {
  Image image = to_image(generated);
  image.pixels = image.pixels.unaryExpr([&range](double y) { return range.invert(y); });
  return image;
}

#define LOWRANK_ALIGN_INSTANTIATE(T)                                            \
  template FeatureMap<T> concat_channels<T>(const ImageSet&, Index);            \
  template FeatureMap<T> to_feature_map<T>(const Image&);                       \
  template Image to_image<T>(const FeatureMap<T>&);                             \
  template FeatureMap<T> channel_slice<T>(const FeatureMap<T>&, Index, Index);  \
  template PreparedSet<T> prepare_set<T>(const ImageSet&, Index);               \
  template Image export_image<T>(const FeatureMap<T>&, const RangeMap&);

LOWRANK_ALIGN_INSTANTIATE(float)
LOWRANK_ALIGN_INSTANTIATE(double)

#undef LOWRANK_ALIGN_INSTANTIATE

}  // namespace lowrank_align::gan
