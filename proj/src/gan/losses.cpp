#include "lowrank_align/gan/losses.hpp"

#include "lowrank_align/error.hpp"
#include "lowrank_align/gan/data.hpp"

namespace lowrank_align::gan {

template <typename Scalar>
double loss_sparse(const FeatureMap<Scalar>& stacked, const FeatureMap<Scalar>& generated, FeatureMap<Scalar>* grad) {
  const Index c = generated.channels;
  if (c < 1 || stacked.channels % c != 0 || stacked.height != generated.height || stacked.width != generated.width) {
    throw Error(ErrorKind::kShapeMismatch, "generated image does not match the per-image shape of the set");
  }
  const Index n = stacked.channels / c;
  const double count = static_cast<double>(stacked.data.size());
  double total = 0.0;
  if (grad) *grad = FeatureMap<Scalar>(c, generated.height, generated.width);
  for (Index j = 0; j < n; ++j) {
    const auto diff = (stacked.data.middleRows(j * c, c) - generated.data).eval();
    total += static_cast<double>(diff.template cast<double>().cwiseAbs().sum());
    if (grad) {
      // d|t - g|/dg = -sign(t - g)
      grad->data -= diff.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : (v < Scalar(0) ? Scalar(-1) : Scalar(0)); });
    }
  }
  if (grad) grad->data /= static_cast<Scalar>(count);
  return total / count;
}

double loss_sparse(const ImageSet& t, const Image& g) {
  t.validate();
  if (!t.images.front().same_shape(g)) {
    throw Error(ErrorKind::kShapeMismatch, "generated image does not match the per-image shape of the set");
  }
  return loss_sparse(concat_channels<double>(t, t.size()), to_feature_map<double>(g));
}

template <typename Scalar>
GanLosses loss_gan_ls(const std::vector<FeatureMap<Scalar>>& scores_real,
                      const std::vector<FeatureMap<Scalar>>& scores_fake, GanLossGradients<Scalar>* grads) {
  double real_count = 0.0;
  double fake_count = 0.0;
  for (const auto& s : scores_real) real_count += static_cast<double>(s.data.size());
  for (const auto& s : scores_fake) fake_count += static_cast<double>(s.data.size());

  GanLosses losses;
  double real_term = 0.0;
  double fake_term = 0.0;
  double gen_term = 0.0;
  for (const auto& s : scores_real) {
    real_term += (s.data.array().template cast<double>() - 1.0).square().sum();
  }
  for (const auto& s : scores_fake) {
    const auto v = s.data.array().template cast<double>();
    fake_term += v.square().sum();
    gen_term += (v - 1.0).square().sum();
  }
  if (real_count > 0) losses.disc += 0.5 * real_term / real_count;
  if (fake_count > 0) {
    losses.disc += 0.5 * fake_term / fake_count;
    losses.gen = 0.5 * gen_term / fake_count;
  }

  if (grads) {
    grads->disc_real.clear();
    grads->disc_fake.clear();
    grads->gen_fake.clear();
    for (const auto& s : scores_real) {
      FeatureMap<Scalar> g = s;
      g.data = ((s.data.array() - Scalar(1)) / static_cast<Scalar>(real_count)).matrix();
      grads->disc_real.push_back(std::move(g));
    }
    for (const auto& s : scores_fake) {
      FeatureMap<Scalar> d = s;
      d.data = (s.data.array() / static_cast<Scalar>(fake_count)).matrix();
      grads->disc_fake.push_back(std::move(d));
      FeatureMap<Scalar> g = s;
      g.data = ((s.data.array() - Scalar(1)) / static_cast<Scalar>(fake_count)).matrix();
      grads->gen_fake.push_back(std::move(g));
    }
  }
  return losses;
}

GanLosses loss_gan_ls(const MatrixXd& scores_real, const MatrixXd& scores_fake) {
  FeatureMap<double> real(1, scores_real.rows(), scores_real.cols());
  FeatureMap<double> fake(1, scores_fake.rows(), scores_fake.cols());
  real.data = Eigen::Map<const Matrix<double>>(MatrixXd(scores_real.transpose()).data(), 1, scores_real.size());
  fake.data = Eigen::Map<const Matrix<double>>(MatrixXd(scores_fake.transpose()).data(), 1, scores_fake.size());
  return loss_gan_ls<double>({real}, {fake});
}

double loss_full(double loss_gan_gen, double loss_sparse_value, double gamma) {
  if (!(gamma >= 0)) throw Error(ErrorKind::kInvalidArgument, "gamma must be >= 0");
  return loss_gan_gen + gamma * loss_sparse_value;
}

template double loss_sparse<float>(const FeatureMap<float>&, const FeatureMap<float>&, FeatureMap<float>*);
template double loss_sparse<double>(const FeatureMap<double>&, const FeatureMap<double>&, FeatureMap<double>*);
template GanLosses loss_gan_ls<float>(const std::vector<FeatureMap<float>>&, const std::vector<FeatureMap<float>>&,
                                      GanLossGradients<float>*);
template GanLosses loss_gan_ls<double>(const std::vector<FeatureMap<double>>&, const std::vector<FeatureMap<double>>&,
                                       GanLossGradients<double>*);

}  // namespace lowrank_align::gan
