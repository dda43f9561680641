#include "lowrank_align/gan/train.hpp"

#include "lowrank_align/error.hpp"

#include <cmath>
#include <sstream>

namespace lowrank_align::gan {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, "train config: " + what); };
  if (!(gamma_sparse >= 0)) fail("gamma_sparse must be >= 0");
  if (!(learning_rate > 0)) fail("learning_rate must be positive");
  if (batch_size < 1) fail("batch_size must be positive");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1)) fail("adam betas must lie in [0, 1)");
  if (!(adam_eps > 0)) fail("adam_eps must be positive");
  if (max_steps < 0) fail("max_steps must be >= 0");
  if (checkpoint_every < 1) fail("checkpoint_every must be positive");
}

template <typename Scalar>
RealPool<Scalar> RealPool<Scalar>::from_sets(const std::vector<PreparedSet<Scalar>>& sets, Index channels) {
  std::vector<FeatureMap<Scalar>> images;
  for (const auto& set : sets) {
    for (Index first = 0; first < set.input.channels; first += channels) {
      images.push_back(channel_slice(set.input, first, channels));
    }
  }
  return RealPool(std::move(images));
}

template <typename Scalar>
const FeatureMap<Scalar>& RealPool<Scalar>::sample(std::mt19937_64& rng) const {
  if (images_.empty()) throw Error(ErrorKind::kInvalidArgument, "real image pool is empty");
  std::uniform_int_distribution<Index> pick(0, size() - 1);
  return images_[pick(rng)];
}

template <typename Scalar>
void adam_update(ParameterSet<Scalar>& params, AdamMoments<Scalar>& moments, const ParameterSet<Scalar>& grads,
                 const TrainConfig& config, std::int64_t step) {
  const double t = static_cast<double>(step);
  const Scalar beta1 = static_cast<Scalar>(config.adam_beta1);
  const Scalar beta2 = static_cast<Scalar>(config.adam_beta2);
  const Scalar correction1 = static_cast<Scalar>(1.0 - std::pow(config.adam_beta1, t));
  const Scalar correction2 = static_cast<Scalar>(1.0 - std::pow(config.adam_beta2, t));
  const Scalar lr = static_cast<Scalar>(config.learning_rate);
  const Scalar eps = static_cast<Scalar>(config.adam_eps);
  for (Index i = 0; i < params.size(); ++i) {
    auto& m = moments.first[i].values;
    auto& v = moments.second[i].values;
    const auto& g = grads[i].values;
    m = beta1 * m + (Scalar(1) - beta1) * g;
    v = beta2 * v + (Scalar(1) - beta2) * g.cwiseProduct(g);
    params[i].values.array() -=
        lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + eps);
  }
}

template <typename Scalar>
GanModel<Scalar>::GanModel(const GeneratorConfig& gen, const DiscriminatorConfig& disc, const TrainConfig& train)
    : generator_(gen), discriminator_(disc), train_(train) {
  train_.validate();
  if (disc.channels != gen.channels) {
    throw Error(ErrorKind::kInvalidArgument, "discriminator channels must match generator output channels");
  }
}

template <typename Scalar>
TrainState<Scalar> GanModel<Scalar>::init_state() const {
  TrainState<Scalar> state;
  state.seed = train_.seed;
  state.rng.seed(train_.seed);
  state.gen_params = generator_.init_parameters(state.rng);
  state.disc_params = discriminator_.init_parameters(state.rng);
  state.gen_moments = {state.gen_params.zeros_like(), state.gen_params.zeros_like()};
  state.disc_moments = {state.disc_params.zeros_like(), state.disc_params.zeros_like()};
  return state;
}

template <typename Scalar>
std::vector<Index> GanModel<Scalar>::sample_batch(TrainState<Scalar>& state, Index dataset_size) const {
  if (dataset_size < 1) throw Error(ErrorKind::kInvalidArgument, "training dataset is empty");
  std::uniform_int_distribution<Index> pick(0, dataset_size - 1);
  std::vector<Index> batch(train_.batch_size);
  for (Index& index : batch) index = pick(state.rng);
  return batch;
}

namespace {

template <typename Scalar>
[[noreturn]] void non_finite(const std::string& phase, const StepMetrics& m) {
  std::ostringstream msg;
  msg << "non-finite loss during " << phase << " update at step " << m.step << " (loss_disc=" << m.loss_disc
      << ", loss_gen_adv=" << m.loss_gen_adv << ", loss_sparse=" << m.loss_sparse
      << ", grad_norm_G=" << m.grad_norm_gen << ", grad_norm_D=" << m.grad_norm_disc << ")";
  throw Error(ErrorKind::kNonFiniteLoss, msg.str());
}

}  // namespace

template <typename Scalar>
StepMetrics GanModel<Scalar>::train_step(TrainState<Scalar>& state,
                                         const std::vector<const PreparedSet<Scalar>*>& batch,
                                         const RealPool<Scalar>& pool) const {
  const Index batch_size = static_cast<Index>(batch.size());
  if (batch_size != train_.batch_size) {
    throw Error(ErrorKind::kInvalidArgument, "batch holds " + std::to_string(batch_size) + " sets, config expects " +
                                                 std::to_string(train_.batch_size));
  }
  StepMetrics metrics;
  metrics.step = state.step + 1;

  std::vector<LayerCache<Scalar>> gen_tapes(batch_size);
  std::vector<FeatureMap<Scalar>> fakes(batch_size);
  std::vector<FeatureMap<Scalar>> sparse_grads(batch_size);
  for (Index b = 0; b < batch_size; ++b) {
    fakes[b] = generator_.forward(state.gen_params, batch[b]->input, &gen_tapes[b]);
    metrics.loss_sparse += loss_sparse(batch[b]->input, fakes[b], &sparse_grads[b]) / static_cast<double>(batch_size);
    sparse_grads[b].data /= static_cast<Scalar>(batch_size);
  }

  // Discriminator update; fakes enter as constants.
  std::vector<LayerCache<Scalar>> real_tapes(batch_size);
  std::vector<LayerCache<Scalar>> fake_tapes(batch_size);
  std::vector<FeatureMap<Scalar>> real_scores(batch_size);
  std::vector<FeatureMap<Scalar>> fake_scores(batch_size);
  for (Index b = 0; b < batch_size; ++b) {
    const FeatureMap<Scalar>& real = pool.sample(state.rng);
    real_scores[b] = discriminator_.forward(state.disc_params, real, &real_tapes[b]);
    fake_scores[b] = discriminator_.forward(state.disc_params, fakes[b], &fake_tapes[b]);
  }
  GanLossGradients<Scalar> disc_grads_out;
  metrics.loss_disc = loss_gan_ls(real_scores, fake_scores, &disc_grads_out).disc;
  if (!std::isfinite(metrics.loss_disc) || !std::isfinite(metrics.loss_sparse)) non_finite<Scalar>("discriminator", metrics);

  ParameterSet<Scalar> disc_grads = state.disc_params.zeros_like();
  for (Index b = 0; b < batch_size; ++b) {
    discriminator_.backward(state.disc_params, real_tapes[b], disc_grads_out.disc_real[b], disc_grads);
    discriminator_.backward(state.disc_params, fake_tapes[b], disc_grads_out.disc_fake[b], disc_grads);
  }
  metrics.grad_norm_disc = std::sqrt(disc_grads.squared_norm());
  adam_update(state.disc_params, state.disc_moments, disc_grads, train_, metrics.step);

  // Generator update against the refreshed discriminator.
  for (Index b = 0; b < batch_size; ++b) {
    fake_scores[b] = discriminator_.forward(state.disc_params, fakes[b], &fake_tapes[b]);
  }
  GanLossGradients<Scalar> gen_grads_out;
  metrics.loss_gen_adv = loss_gan_ls<Scalar>({}, fake_scores, &gen_grads_out).gen;
  metrics.loss_full = loss_full(metrics.loss_gen_adv, metrics.loss_sparse, train_.gamma_sparse);
  if (!std::isfinite(metrics.loss_full)) non_finite<Scalar>("generator", metrics);

  ParameterSet<Scalar> gen_grads = state.gen_params.zeros_like();
  ParameterSet<Scalar> scratch = state.disc_params.zeros_like();
  const Scalar gamma = static_cast<Scalar>(train_.gamma_sparse);
  for (Index b = 0; b < batch_size; ++b) {
    FeatureMap<Scalar> d_fake = discriminator_.backward(state.disc_params, fake_tapes[b], gen_grads_out.gen_fake[b], scratch);
    d_fake.data += gamma * sparse_grads[b].data;
    generator_.backward(state.gen_params, gen_tapes[b], d_fake, gen_grads);
  }
  metrics.grad_norm_gen = std::sqrt(gen_grads.squared_norm());
  if (!std::isfinite(metrics.grad_norm_gen) || !std::isfinite(metrics.grad_norm_disc)) non_finite<Scalar>("generator", metrics);
  adam_update(state.gen_params, state.gen_moments, gen_grads, train_, metrics.step);

  state.step = metrics.step;
  return metrics;
}

template <typename Scalar>
Image align_gan(const Generator<Scalar>& generator, const ParameterSet<Scalar>& gen_params, const ImageSet& set) {
  const PreparedSet<Scalar> prepared = prepare_set<Scalar>(set, generator.config().set_size);
  return export_image(generator.forward(gen_params, prepared.input, nullptr), prepared.range);
}

#define LOWRANK_ALIGN_INSTANTIATE(T)                                                                        \
  template class RealPool<T>;                                                                               \
  template class GanModel<T>;                                                                               \
  template void adam_update<T>(ParameterSet<T>&, AdamMoments<T>&, const ParameterSet<T>&, const TrainConfig&, \
                               std::int64_t);                                                               \
  template Image align_gan<T>(const Generator<T>&, const ParameterSet<T>&, const ImageSet&);

LOWRANK_ALIGN_INSTANTIATE(float)
LOWRANK_ALIGN_INSTANTIATE(double)

#undef LOWRANK_ALIGN_INSTANTIATE

}  // namespace lowrank_align::gan
