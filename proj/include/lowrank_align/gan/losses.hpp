#pragma once

#include "lowrank_align/core.hpp"
#include "lowrank_align/gan/tensor.hpp"

#include <vector>

namespace lowrank_align::gan {

/// Mean of |t_j - g| over every entry of every image t_j in the stack, with g
/// broadcast against each image. `stacked` holds n * c channels, `generated` c.
/// When `grad` is non-null it receives d loss / d generated, using a zero
/// subgradient where t_j == g.
template <typename Scalar>
double loss_sparse(const FeatureMap<Scalar>& stacked, const FeatureMap<Scalar>& generated,
                   FeatureMap<Scalar>* grad = nullptr);

/// Image-level form; throws kShapeMismatch.
double loss_sparse(const ImageSet& t, const Image& g);

struct GanLosses {
  double disc = 0.0;  // 1/2 mean (real - 1)^2 + 1/2 mean fake^2
  double gen = 0.0;   // 1/2 mean (fake - 1)^2
};

template <typename Scalar>
struct GanLossGradients {
  std::vector<FeatureMap<Scalar>> disc_real;
  std::vector<FeatureMap<Scalar>> disc_fake;
  std::vector<FeatureMap<Scalar>> gen_fake;
};

/// Least-squares adversarial losses with 0/1 targets. Means run over every
/// patch score of every sample in the batch.
template <typename Scalar>
GanLosses loss_gan_ls(const std::vector<FeatureMap<Scalar>>& scores_real,
                      const std::vector<FeatureMap<Scalar>>& scores_fake, GanLossGradients<Scalar>* grads = nullptr);

GanLosses loss_gan_ls(const MatrixXd& scores_real, const MatrixXd& scores_fake);

/// Generator objective loss_gen + gamma * loss_sparse. Throws on gamma < 0.
double loss_full(double loss_gan_gen, double loss_sparse, double gamma);

}  // namespace lowrank_align::gan
