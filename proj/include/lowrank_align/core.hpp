#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace lowrank_align {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One image stored planar: channel-major, then row-major within a channel.
/// `pixels(ch * height * width + y * width + x)` is pixel (y, x) of channel ch.
struct Image {
  Index height = 0;
  Index width = 0;
  Index channels = 0;
  VectorXd pixels;

  Image() = default;
  Image(Index h, Index w, Index c) : height(h), width(w), channels(c), pixels(VectorXd::Zero(h * w * c)) {}

  Index size() const { return height * width * channels; }
  Index plane() const { return height * width; }
  double& at(Index y, Index x, Index ch = 0) { return pixels(ch * plane() + y * width + x); }
  double at(Index y, Index x, Index ch = 0) const { return pixels(ch * plane() + y * width + x); }
  bool same_shape(const Image& other) const {
    return height == other.height && width == other.width && channels == other.channels;
  }
  bool operator==(const Image& other) const {
    return same_shape(other) && pixels == other.pixels;
  }
};

/// n images of one subject; the unit of alignment.
struct ImageSet {
  std::vector<Image> images;
  std::string subject_id;
  bool standardized = false;

  Index size() const { return static_cast<Index>(images.size()); }
  Index height() const { return images.empty() ? 0 : images.front().height; }
  Index width() const { return images.empty() ? 0 : images.front().width; }
  Index channels() const { return images.empty() ? 0 : images.front().channels; }

  /// Throws kShapeMismatch / kInvalidArgument on empty sets, ragged shapes or
  /// non-finite pixels.
  void validate() const;
};

struct ShapeMeta {
  Index height = 0;
  Index width = 0;
  Index channels = 0;
  Index rows() const { return height * width * channels; }
  bool operator==(const ShapeMeta&) const = default;
};

/// Images flattened as columns (m x n, m = h*w*c).
struct StackedMatrix {
  MatrixXd data;
  ShapeMeta shape;
};

StackedMatrix flatten_stack(const ImageSet& set);
ImageSet unflatten(const StackedMatrix& stacked);
Image column_image(const StackedMatrix& stacked, Index column);

struct StandardizeResult {
  Image image;
  double mean = 0.0;
  double stddev = 0.0;
  bool constant = false;  // std below 1e-12; output is all zeros
};

/// Zero mean, unit population standard deviation over the whole image.
StandardizeResult standardize(const Image& image);

/// Standardizes every image and sets the flag. Returns the number of constant
/// images that were zeroed.
int standardize_set(ImageSet& set);

/// Entrywise soft thresholding sign(x) * max(|x| - mu, 0).
MatrixXd shrink(const MatrixXd& m, double mu);

struct SvtResult {
  MatrixXd thresholded;
  Index retained_rank = 0;
  VectorXd singular_values;  // of the input, nonincreasing
};

/// Proximal operator of tau * nuclear norm.
SvtResult svt(const MatrixXd& m, double tau);

/// Thin SVD wrapper that throws kSvdFailure with matrix diagnostics.
Eigen::BDCSVD<MatrixXd> checked_svd(const MatrixXd& m, unsigned int options);

}  // namespace lowrank_align
