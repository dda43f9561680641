#pragma once

#include "lowrank_align/gan/train.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace lowrank_align::gan {

/// Checkpoint layout (one directory):
///   manifest.txt        key=value lines: format, precision, step, seed, configs
///   rng_state.txt       engine state
///   <group>/<tensor>.bin  one blob per tensor, groups gen, gen_adam_m,
///                       gen_adam_v, disc, disc_adam_m, disc_adam_v
/// Blob: "LRAT", uint32 bits (32|64), uint32 ndim, uint64 dims[ndim], then the
/// values, all little-endian.
struct CheckpointMeta {
  GeneratorConfig gen;
  DiscriminatorConfig disc;
  TrainConfig train;  // max_steps and checkpoint_every are not stored
  int precision = 32;
  std::int64_t step = 0;
  std::uint64_t seed = 0;
};

template <typename Scalar>
void write_tensor_blob(const std::filesystem::path& path, const Tensor<Scalar>& tensor);

/// Reads a blob of either precision into Scalar. Throws kIoError.
template <typename Scalar>
Tensor<Scalar> read_tensor_blob(const std::filesystem::path& path);

template <typename Scalar>
void save_checkpoint(const std::filesystem::path& dir, const TrainState<Scalar>& state, const GanModel<Scalar>& model);

/// Throws kCheckpointMissing when the manifest is absent, kIoError on a
/// malformed one.
CheckpointMeta read_checkpoint_meta(const std::filesystem::path& dir);

/// Restores a state for `model`; tensor names and shapes must match its layout.
template <typename Scalar>
TrainState<Scalar> load_checkpoint(const std::filesystem::path& dir, const GanModel<Scalar>& model);

/// Generator weights only, for inference.
template <typename Scalar>
ParameterSet<Scalar> load_generator_params(const std::filesystem::path& dir, const Generator<Scalar>& generator);

/// Parses `key=value` lines, ignoring blanks and '#' comments.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace lowrank_align::gan
