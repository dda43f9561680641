#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace lowrank_align::gan {

using Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Activations of one sample: one row per channel, each row a row-major
/// height x width plane.
template <typename Scalar>
struct FeatureMap {
  Index channels = 0;
  Index height = 0;
  Index width = 0;
  Matrix<Scalar> data;

  FeatureMap() = default;
  FeatureMap(Index c, Index h, Index w) : channels(c), height(h), width(w), data(Matrix<Scalar>::Zero(c, h * w)) {}

  Index plane() const { return height * width; }
  bool same_shape(const FeatureMap& other) const {
    return channels == other.channels && height == other.height && width == other.width;
  }
};

/// A named dense parameter tensor; values are stored flat in row-major order.
template <typename Scalar>
struct Tensor {
  std::vector<Index> shape;
  Vector<Scalar> values;

  Index size() const {
    Index n = 1;
    for (Index d : shape) n *= d;
    return n;
  }
};

/// Ordered, named tensors for one network (weights, gradients or optimizer
/// moments all share this layout).
template <typename Scalar>
class ParameterSet {
 public:
  Index add(const std::string& name, std::vector<Index> shape) {
    Tensor<Scalar> tensor;
    tensor.shape = std::move(shape);
    tensor.values = Vector<Scalar>::Zero(tensor.size());
    names_.push_back(name);
    tensors_.push_back(std::move(tensor));
    return static_cast<Index>(tensors_.size()) - 1;
  }

  Index size() const { return static_cast<Index>(tensors_.size()); }
  const std::string& name(Index slot) const { return names_[slot]; }
  const std::vector<std::string>& names() const { return names_; }
  Tensor<Scalar>& operator[](Index slot) { return tensors_[slot]; }
  const Tensor<Scalar>& operator[](Index slot) const { return tensors_[slot]; }

  /// Returns -1 when absent.
  Index find(const std::string& name) const {
    for (Index i = 0; i < size(); ++i) {
      if (names_[i] == name) return i;
    }
    return -1;
  }

  ParameterSet zeros_like() const {
    ParameterSet out = *this;
    for (auto& t : out.tensors_) t.values.setZero();
    return out;
  }

  void set_zero() {
    for (auto& t : tensors_) t.values.setZero();
  }

  double squared_norm() const {
    double total = 0.0;
    for (const auto& t : tensors_) total += static_cast<double>(t.values.squaredNorm());
    return total;
  }

  bool all_finite() const {
    for (const auto& t : tensors_) {
      if (!t.values.allFinite()) return false;
    }
    return true;
  }

  Index total_values() const {
    Index n = 0;
    for (const auto& t : tensors_) n += t.size();
    return n;
  }

  bool operator==(const ParameterSet& other) const {
    if (names_ != other.names_) return false;
    for (Index i = 0; i < size(); ++i) {
      if (tensors_[i].shape != other.tensors_[i].shape || tensors_[i].values != other.tensors_[i].values) return false;
    }
    return true;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor<Scalar>> tensors_;
};

}  // namespace lowrank_align::gan
