#include "lowrank_align/error.hpp"
#include "lowrank_align/synthdata.hpp"
#include "lowrank_align/transform.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lowrank_align;

namespace {

Image smooth_image(Index h, Index w) {
  Image img(h, w, 1);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) img.at(y, x) = std::sin(0.3 * x) * std::cos(0.2 * y) + 0.01 * x * y;
  return img;
}

double interior_max_diff(const Image& a, const Image& b, Index margin) {
  double worst = 0.0;
  for (Index ch = 0; ch < a.channels; ++ch)
    for (Index y = margin; y < a.height - margin; ++y)
      for (Index x = margin; x < a.width - margin; ++x) worst = std::max(worst, std::abs(a.at(y, x, ch) - b.at(y, x, ch)));
  return worst;
}

}  // namespace

TEST(TransformModel, ParameterCountsAndNames) {
  EXPECT_EQ(parameter_count(TransformModel::kTranslation), 2);
  EXPECT_EQ(parameter_count(TransformModel::kSimilarity), 4);
  EXPECT_EQ(parameter_count(TransformModel::kAffine), 6);
  for (auto m : {TransformModel::kTranslation, TransformModel::kSimilarity, TransformModel::kAffine})
    EXPECT_EQ(transform_model_from_string(to_string(m)), m);
  EXPECT_THROW(transform_model_from_string("projective"), Error);
}

TEST(Warp, ZeroThetaIsIdentity) {
  std::mt19937_64 rng(1);
  const Image img = testutil::random_image(9, 11, 2, rng);
  for (auto m : {TransformModel::kTranslation, TransformModel::kSimilarity, TransformModel::kAffine})
    EXPECT_TRUE(warp(img, VectorXd::Zero(parameter_count(m)), m) == img);
}

TEST(Warp, PositiveShiftMovesContentRight) {
  Image img(5, 5, 1);
  img.at(2, 2) = 1.0;
  VectorXd t(2);
  t << 1, 0;
  const Image out = warp(img, t, TransformModel::kTranslation);
  EXPECT_EQ(out.at(2, 3), 1.0);
  EXPECT_EQ(out.at(2, 2), 0.0);
}

TEST(Warp, IntegerShiftRoundTripIsExactInInterior) {
  std::mt19937_64 rng(2);
  const Image img = testutil::random_image(12, 12, 1, rng);
  VectorXd fwd(2), back(2);
  fwd << 2, 0;
  back << -2, 0;
  const Image out = warp(warp(img, fwd, TransformModel::kTranslation), back, TransformModel::kTranslation);
  for (Index y = 0; y < 12; ++y)
    for (Index x = 0; x < 10; ++x) EXPECT_EQ(out.at(y, x), img.at(y, x));
}

TEST(Warp, FirstOrderInverseErrorIsQuadratic) {
  // Bilinear sampling is exact on a linear ramp, so only the transform algebra contributes.
  Image img(40, 40, 1);
  for (Index y = 0; y < 40; ++y)
    for (Index x = 0; x < 40; ++x) img.at(y, x) = 1.0 + 0.3 * x - 0.2 * y;
  VectorXd direction(6);
  direction << 0.3, -0.2, 0.25, 0.1, 1.0, -0.7;
  std::vector<double> scales{0.02, 0.04, 0.08};
  std::vector<double> errors;
  for (double s : scales) {
    const VectorXd theta = s * direction;
    const Image round = warp(warp(img, theta, TransformModel::kAffine), -theta, TransformModel::kAffine);
    errors.push_back(interior_max_diff(img, round, 8));
  }
  // log-log slope between successive magnitudes
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double slope = std::log(errors[i] / errors[i - 1]) / std::log(scales[i] / scales[i - 1]);
    EXPECT_NEAR(slope, 2.0, 0.2) << "errors " << errors[i - 1] << " " << errors[i];
  }
}

TEST(Warp, ExactInverseRecoversImage) {
  const Image img = smooth_image(40, 40);
  VectorXd theta(4);
  theta << 0.05, 0.08, 1.3, -0.6;
  const VectorXd inv = inverse_theta(theta, TransformModel::kSimilarity);
  const AffineMap a = affine_map(theta, TransformModel::kSimilarity);
  const AffineMap b = affine_map(inv, TransformModel::kSimilarity);
  EXPECT_LT((a.linear * b.linear - Eigen::Matrix2d::Identity()).norm(), 1e-12);
  const Image round = warp(warp(img, theta, TransformModel::kSimilarity), inv, TransformModel::kSimilarity);
  EXPECT_LT(interior_max_diff(img, round, 8), 0.05);
}

TEST(Warp, DegenerateTransformRejected) {
  VectorXd theta(6);
  theta << -0.95, 0, 0, -0.95, 0, 0;
  std::mt19937_64 rng(3);
  try {
    warp(testutil::random_image(4, 4, 1, rng), theta, TransformModel::kAffine);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateTransform);
  }
  VectorXd wrong(3);
  EXPECT_THROW(warp(testutil::random_image(4, 4, 1, rng), wrong, TransformModel::kTranslation), Error);
}

TEST(WarpJacobian, ConstantImageGivesZero) {
  Image img(8, 8, 1);
  img.pixels.setConstant(0.7);
  VectorXd theta(4);
  theta << 0.01, 0.02, 0.3, -0.2;
  EXPECT_LT(warp_jacobian(img, theta, TransformModel::kSimilarity).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(WarpJacobian, RampShiftDerivativeIsMinusOne) {
  Image ramp(10, 12, 1);
  for (Index y = 0; y < 10; ++y)
    for (Index x = 0; x < 12; ++x) ramp.at(y, x) = static_cast<double>(x);
  VectorXd theta(2);
  theta << 0.3, 0.2;
  const MatrixXd j = warp_jacobian(ramp, theta, TransformModel::kTranslation);
  ASSERT_EQ(j.rows(), 120);
  ASSERT_EQ(j.cols(), 2);
  for (Index y = 2; y < 8; ++y)
    for (Index x = 2; x < 10; ++x) {
      EXPECT_NEAR(j(y * 12 + x, 0), -1.0, 1e-8);
      EXPECT_NEAR(j(y * 12 + x, 1), 0.0, 1e-8);
    }
}

TEST(WarpJacobian, DirectionalDerivativeConsistency) {
  const Image img = smooth_image(30, 30);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  for (auto model : {TransformModel::kTranslation, TransformModel::kSimilarity, TransformModel::kAffine}) {
    const Index p = parameter_count(model);
    VectorXd theta(p), v(p);
    for (Index k = 0; k < p; ++k) {
      theta(k) = (k + 2 >= p ? 0.7 : 0.02) * n01(rng);
      v(k) = (k + 2 >= p ? 1.0 : 0.05) * n01(rng);
    }
    const MatrixXd j = warp_jacobian(img, theta, model);
    const VectorXd base = warp(img, theta, model).pixels;
    // bilinear sampling has slope kinks on the pixel grid, so compare in L2
    std::vector<double> rel;
    for (double eps : {1e-2, 1e-3}) {
      const VectorXd linear = eps * j * v;
      const VectorXd actual = warp(img, theta + eps * v, model).pixels - base;
      rel.push_back((actual - linear).norm() / linear.norm());
    }
    EXPECT_LT(rel[0], 0.05) << to_string(model);
    EXPECT_LT(rel[1], rel[0]) << to_string(model);
  }
}
