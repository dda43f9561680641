#include "lowrank_align/error.hpp"
#include "lowrank_align/transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lowrank_align {

Index parameter_count(TransformModel model) {
  switch (model) {
    case TransformModel::kTranslation: return 2;
    case TransformModel::kSimilarity: return 4;
    case TransformModel::kAffine: return 6;
  }
  return 0;
}

std::string to_string(TransformModel model) {
  switch (model) {
    case TransformModel::kTranslation: return "translation";
    case TransformModel::kSimilarity: return "similarity";
    case TransformModel::kAffine: return "affine";
  }
  return "unknown";
}

TransformModel transform_model_from_string(const std::string& name) {
  if (name == "translation") return TransformModel::kTranslation;
  if (name == "similarity") return TransformModel::kSimilarity;
  if (name == "affine") return TransformModel::kAffine;
  throw Error(ErrorKind::kInvalidArgument, "unknown transform model '" + name + "'");
}

AffineMap affine_map(const VectorXd& theta, TransformModel model) {
  if (theta.size() != parameter_count(model)) {
    throw Error(ErrorKind::kInvalidArgument, "parameter vector length does not match transform model");
  }
  AffineMap map;
  map.linear.setIdentity();
  switch (model) {
    case TransformModel::kTranslation:
      map.translation << theta(0), theta(1);
      break;
    case TransformModel::kSimilarity:
      map.linear << 1 + theta(0), -theta(1), theta(1), 1 + theta(0);
      map.translation << theta(2), theta(3);
      break;
    case TransformModel::kAffine:
      map.linear(0, 0) += theta(0);
      map.linear(0, 1) += theta(1);
      map.linear(1, 0) += theta(2);
      map.linear(1, 1) += theta(3);
      map.translation << theta(4), theta(5);
      break;
  }
  return map;
}

void check_invertible(const VectorXd& theta, TransformModel model) {
  if (!theta.allFinite()) throw Error(ErrorKind::kDegenerateTransform, "non-finite warp parameters");
  const double det = std::abs(affine_map(theta, model).linear.determinant());
  if (det < 0.1 || det > 10.0) {
    std::ostringstream msg;
    msg << "|det| of linear part is " << det << ", outside [0.1, 10]";
    throw Error(ErrorKind::kDegenerateTransform, msg.str());
  }
}

VectorXd inverse_theta(const VectorXd& theta, TransformModel model) {
  check_invertible(theta, model);
  const AffineMap map = affine_map(theta, model);
  // q = L (p - c) + c - t  =>  p = L^-1 (q - c) + c + L^-1 t
  const Eigen::Matrix2d inv = map.linear.inverse();
  const Eigen::Vector2d t = -(inv * map.translation);
  VectorXd out(theta.size());
  switch (model) {
    case TransformModel::kTranslation:
      out << t(0), t(1);
      break;
    case TransformModel::kSimilarity:
      out << inv(0, 0) - 1, inv(1, 0), t(0), t(1);
      break;
    case TransformModel::kAffine:
      out << inv(0, 0) - 1, inv(0, 1), inv(1, 0), inv(1, 1) - 1, t(0), t(1);
      break;
  }
  return out;
}

TransformParams inverse_params(const TransformParams& params) {
  TransformParams out = params;
  for (Index j = 0; j < params.size(); ++j) {
    out.theta.row(j) = inverse_theta(params.theta.row(j).transpose(), params.model).transpose();
  }
  return out;
}

Image warp(const Image& image, const VectorXd& theta, TransformModel model) {
  check_invertible(theta, model);
  const AffineMap map = affine_map(theta, model);
  const double cx = 0.5 * static_cast<double>(image.width - 1);
  const double cy = 0.5 * static_cast<double>(image.height - 1);
  const double max_x = static_cast<double>(image.width - 1);
  const double max_y = static_cast<double>(image.height - 1);
  Image out(image.height, image.width, image.channels);
  for (Index y = 0; y < image.height; ++y) {
    for (Index x = 0; x < image.width; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      double sx = map.linear(0, 0) * dx + map.linear(0, 1) * dy + cx - map.translation(0);
      double sy = map.linear(1, 0) * dx + map.linear(1, 1) * dy + cy - map.translation(1);
      sx = std::clamp(sx, 0.0, max_x);
      sy = std::clamp(sy, 0.0, max_y);
      const Index x0 = static_cast<Index>(std::floor(sx));
      const Index y0 = static_cast<Index>(std::floor(sy));
      const Index x1 = std::min(x0 + 1, image.width - 1);
      const Index y1 = std::min(y0 + 1, image.height - 1);
      const double fx = sx - static_cast<double>(x0);
      const double fy = sy - static_cast<double>(y0);
      for (Index ch = 0; ch < image.channels; ++ch) {
        const double top = (1 - fx) * image.at(y0, x0, ch) + fx * image.at(y0, x1, ch);
        const double bottom = (1 - fx) * image.at(y1, x0, ch) + fx * image.at(y1, x1, ch);
        out.at(y, x, ch) = (1 - fy) * top + fy * bottom;
      }
    }
  }
  return out;
}

MatrixXd warp_jacobian(const Image& image, const VectorXd& theta, TransformModel model) {
  constexpr double kStep = 1e-4;
  const Index p = parameter_count(model);
  MatrixXd jacobian(image.size(), p);
  for (Index k = 0; k < p; ++k) {
    VectorXd plus = theta;
    VectorXd minus = theta;
    plus(k) += kStep;
    minus(k) -= kStep;
    jacobian.col(k) = (warp(image, plus, model).pixels - warp(image, minus, model).pixels) / (2 * kStep);
  }
  return jacobian;
}

}  // namespace lowrank_align
