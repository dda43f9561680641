#pragma once

#include "lowrank_align/core.hpp"
#include "lowrank_align/gan/data.hpp"
#include "lowrank_align/gan/losses.hpp"
#include "lowrank_align/gan/networks.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace lowrank_align::gan {

struct TrainConfig {
  double gamma_sparse = 2e-5;
  double learning_rate = 2e-4;
  Index batch_size = 16;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::int64_t max_steps = 1000;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_every = 100;

  void validate() const;
};

template <typename Scalar>
struct AdamMoments {
  ParameterSet<Scalar> first;
  ParameterSet<Scalar> second;

  bool operator==(const AdamMoments&) const = default;
};

/// Everything needed to continue a training run bit-exactly.
template <typename Scalar>
struct TrainState {
  ParameterSet<Scalar> gen_params;
  ParameterSet<Scalar> disc_params;
  AdamMoments<Scalar> gen_moments;
  AdamMoments<Scalar> disc_moments;
  std::int64_t step = 0;
  std::uint64_t seed = 0;
  std::mt19937_64 rng;

  bool operator==(const TrainState&) const = default;
};

struct StepMetrics {
  std::int64_t step = 0;
  double loss_disc = 0.0;
  double loss_gen_adv = 0.0;
  double loss_sparse = 0.0;
  double loss_full = 0.0;
  double grad_norm_gen = 0.0;
  double grad_norm_disc = 0.0;
};

/// Uniform sampler over individual network-space images (the "real" domain).
template <typename Scalar>
class RealPool {
 public:
  RealPool() = default;
  explicit RealPool(std::vector<FeatureMap<Scalar>> images) : images_(std::move(images)) {}

  /// Every image of every set, in order.
  static RealPool from_sets(const std::vector<PreparedSet<Scalar>>& sets, Index channels);

  Index size() const { return static_cast<Index>(images_.size()); }
  const FeatureMap<Scalar>& sample(std::mt19937_64& rng) const;

 private:
  std::vector<FeatureMap<Scalar>> images_;
};

/// One Adam update with bias correction; `step` is the 1-based update count.
template <typename Scalar>
void adam_update(ParameterSet<Scalar>& params, AdamMoments<Scalar>& moments, const ParameterSet<Scalar>& grads,
                 const TrainConfig& config, std::int64_t step);

template <typename Scalar>
class GanModel {
 public:
  GanModel(const GeneratorConfig& gen, const DiscriminatorConfig& disc, const TrainConfig& train);

  const Generator<Scalar>& generator() const { return generator_; }
  const Discriminator<Scalar>& discriminator() const { return discriminator_; }
  const TrainConfig& train_config() const { return train_; }

  /// Fresh parameters (generator first, then discriminator) and zero moments,
  /// all drawn from an engine seeded with the train config's seed.
  TrainState<Scalar> init_state() const;

  /// Indices of the next batch, drawn uniformly with replacement from the
  /// state's engine.
  std::vector<Index> sample_batch(TrainState<Scalar>& state, Index dataset_size) const;

  /// One discriminator update on the least-squares loss (fakes detached), then
  /// one generator update on loss_gen + gamma * loss_sparse. Throws
  /// kNonFiniteLoss with per-term diagnostics.
  StepMetrics train_step(TrainState<Scalar>& state, const std::vector<const PreparedSet<Scalar>*>& batch,
                         const RealPool<Scalar>& pool) const;

 private:
  Generator<Scalar> generator_;
  Discriminator<Scalar> discriminator_;
  TrainConfig train_;
};

/// Pure inference: rescale the set into [-1, 1], run the generator, and map
/// the output back into the set's units.
template <typename Scalar>
Image align_gan(const Generator<Scalar>& generator, const ParameterSet<Scalar>& gen_params, const ImageSet& set);

}  // namespace lowrank_align::gan
