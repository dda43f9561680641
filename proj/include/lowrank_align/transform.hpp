#pragma once

#include "lowrank_align/core.hpp"

#include <string>

namespace lowrank_align {

/// Parametric 2-D warps. Every model samples the source image at
///   q = L (p - c) + c - t
/// for an output pixel p, with c the image center and theta = 0 the identity.
///   translation: theta = (tx, ty),                 L = I
///   similarity:  theta = (a, b, tx, ty),           L = [[1+a, -b], [b, 1+a]]
///   affine:      theta = (a11, a12, a21, a22, tx, ty), L = I + [[a11, a12], [a21, a22]]
/// A positive tx therefore moves image content to the right.
enum class TransformModel { kTranslation, kSimilarity, kAffine };

Index parameter_count(TransformModel model);
std::string to_string(TransformModel model);
TransformModel transform_model_from_string(const std::string& name);

/// Per-image warp parameters, one row per image.
struct TransformParams {
  TransformModel model = TransformModel::kTranslation;
  MatrixXd theta;  // n x parameter_count(model)

  static TransformParams zeros(TransformModel model, Index n) {
    return {model, MatrixXd::Zero(n, parameter_count(model))};
  }
  Index size() const { return theta.rows(); }
};

struct AffineMap {
  Eigen::Matrix2d linear;
  Eigen::Vector2d translation;
};

AffineMap affine_map(const VectorXd& theta, TransformModel model);

/// Parameters of the exact inverse map, so warp(warp(I, theta), inverse) == I
/// up to interpolation and boundary effects.
VectorXd inverse_theta(const VectorXd& theta, TransformModel model);
TransformParams inverse_params(const TransformParams& params);

/// Throws kDegenerateTransform unless |det L| lies in [0.1, 10].
void check_invertible(const VectorXd& theta, TransformModel model);

/// Inverse warp with bilinear interpolation and boundary-clamped sampling.
Image warp(const Image& image, const VectorXd& theta, TransformModel model);

/// Central-difference Jacobian of vec(warp(image, theta)) with respect to
/// theta, step 1e-4 per parameter. Rows follow the image flattening order.
MatrixXd warp_jacobian(const Image& image, const VectorXd& theta, TransformModel model);

}  // namespace lowrank_align
