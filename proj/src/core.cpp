#include "lowrank_align/core.hpp"

#include "lowrank_align/error.hpp"

#include <cmath>
#include <sstream>

namespace lowrank_align {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kSvdFailure: return "SvdFailure";
    case ErrorKind::kUnknownKind: return "UnknownKind";
    case ErrorKind::kEmptySubject: return "EmptySubject";
    case ErrorKind::kSizeMismatch: return "SizeMismatch";
    case ErrorKind::kDecodeError: return "DecodeError";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kDegenerateTransform: return "DegenerateTransform";
    case ErrorKind::kDivergedTransform: return "DivergedTransform";
    case ErrorKind::kMaxIterations: return "MaxIterations";
    case ErrorKind::kSetSizeMismatch: return "SetSizeMismatch";
    case ErrorKind::kInputTooSmall: return "InputTooSmall";
    case ErrorKind::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::kZeroMatrix: return "ZeroMatrix";
    case ErrorKind::kModelMismatch: return "ModelMismatch";
    case ErrorKind::kCheckpointMissing: return "CheckpointMissing";
    case ErrorKind::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

void ImageSet::validate() const {
  if (images.empty()) throw Error(ErrorKind::kInvalidArgument, "image set is empty");
  const Image& first = images.front();
  if (first.height < 1 || first.width < 1 || first.channels < 1) {
    throw Error(ErrorKind::kShapeMismatch, "image dimensions must be positive");
  }
  for (const Image& image : images) {
    if (!image.same_shape(first) || image.pixels.size() != image.size()) {
      throw Error(ErrorKind::kShapeMismatch, "images in a set must share one shape");
    }
    if (!image.pixels.allFinite()) {
      throw Error(ErrorKind::kInvalidArgument, "image contains non-finite pixels");
    }
  }
}

StackedMatrix flatten_stack(const ImageSet& set) {
  set.validate();
  StackedMatrix out;
  out.shape = {set.height(), set.width(), set.channels()};
  out.data.resize(out.shape.rows(), set.size());
  for (Index j = 0; j < set.size(); ++j) out.data.col(j) = set.images[j].pixels;
  return out;
}

Image column_image(const StackedMatrix& stacked, Index column) {
  Image image(stacked.shape.height, stacked.shape.width, stacked.shape.channels);
  image.pixels = stacked.data.col(column);
  return image;
}

ImageSet unflatten(const StackedMatrix& stacked) {
  if (stacked.data.rows() != stacked.shape.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "stacked matrix rows do not match shape metadata");
  }
  ImageSet set;
  set.images.reserve(stacked.data.cols());
  for (Index j = 0; j < stacked.data.cols(); ++j) set.images.push_back(column_image(stacked, j));
  return set;
}

StandardizeResult standardize(const Image& image) {
  StandardizeResult result;
  result.image = image;
  const double count = static_cast<double>(image.pixels.size());
  result.mean = image.pixels.sum() / count;
  const VectorXd centered = image.pixels.array() - result.mean;
  result.stddev = std::sqrt(centered.squaredNorm() / count);
  if (!(result.stddev >= 1e-12)) {
    result.constant = true;
    result.image.pixels.setZero();
    return result;
  }
  result.image.pixels = centered / result.stddev;
  return result;
}

int standardize_set(ImageSet& set) {
  int constant = 0;
  for (Image& image : set.images) {
    StandardizeResult r = standardize(image);
    if (r.constant) ++constant;
    image = std::move(r.image);
  }
  set.standardized = true;
  return constant;
}

MatrixXd shrink(const MatrixXd& m, double mu) {
  if (!(mu > 0)) throw Error(ErrorKind::kInvalidArgument, "shrink threshold must be positive");
  return m.unaryExpr([mu](double x) {
    const double magnitude = std::abs(x) - mu;
    return magnitude > 0 ? std::copysign(magnitude, x) : 0.0;
  });
}

Eigen::BDCSVD<MatrixXd> checked_svd(const MatrixXd& m, unsigned int options) {
  if (!m.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite entries in " << m.rows() << "x" << m.cols() << " matrix";
    throw Error(ErrorKind::kSvdFailure, msg.str());
  }
  Eigen::BDCSVD<MatrixXd> svd(m, options);
  if (svd.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "SVD did not converge on " << m.rows() << "x" << m.cols()
        << " matrix (frobenius norm " << m.norm() << ", max |entry| " << m.cwiseAbs().maxCoeff() << ")";
    throw Error(ErrorKind::kSvdFailure, msg.str());
  }
  return svd;
}

SvtResult svt(const MatrixXd& m, double tau) {
  if (!(tau > 0)) throw Error(ErrorKind::kInvalidArgument, "svt threshold must be positive");
  SvtResult result;
  if (m.size() == 0) {
    result.thresholded = m;
    return result;
  }
  const auto svd = checked_svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  result.singular_values = svd.singularValues();
  Index rank = 0;
  while (rank < result.singular_values.size() && result.singular_values(rank) > tau) ++rank;
  result.retained_rank = rank;
  if (rank == 0) {
    result.thresholded = MatrixXd::Zero(m.rows(), m.cols());
    return result;
  }
  const VectorXd kept = result.singular_values.head(rank).array() - tau;
  result.thresholded = svd.matrixU().leftCols(rank) * kept.asDiagonal() * svd.matrixV().leftCols(rank).transpose();
  return result;
}

}  // namespace lowrank_align
