#pragma once

#include "lowrank_align/core.hpp"
#include "lowrank_align/gan/tensor.hpp"

#include <vector>

namespace lowrank_align::gan {

/// Image j of the set occupies channels [j*c, (j+1)*c), in set order.
/// Throws kSetSizeMismatch when the set does not hold `set_size` images.
template <typename Scalar>
FeatureMap<Scalar> concat_channels(const ImageSet& set, Index set_size);

template <typename Scalar>
FeatureMap<Scalar> to_feature_map(const Image& image);

template <typename Scalar>
Image to_image(const FeatureMap<Scalar>& map);

/// Channels [first, first + count) of a feature map.
template <typename Scalar>
FeatureMap<Scalar> channel_slice(const FeatureMap<Scalar>& map, Index first, Index count);

/// Affine map x -> scale * x + offset taking a set's [min, max] onto [-1, 1].
struct RangeMap {
  double scale = 1.0;
  double offset = 0.0;

  double apply(double x) const { return scale * x + offset; }
  double invert(double y) const { return (y - offset) / scale; }
};

RangeMap fit_range_map(const ImageSet& set);

/// A set in network space: rescaled into [-1, 1] and channel-concatenated.
template <typename Scalar>
struct PreparedSet {
  FeatureMap<Scalar> input;
  RangeMap range;
};

template <typename Scalar>
PreparedSet<Scalar> prepare_set(const ImageSet& set, Index set_size);

/// Maps a network-space image back through the set's range map.
template <typename Scalar>
Image export_image(const FeatureMap<Scalar>& generated, const RangeMap& range);

}  // namespace lowrank_align::gan
