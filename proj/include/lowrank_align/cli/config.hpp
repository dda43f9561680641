#pragma once

#include "lowrank_align/gan/grad_check.hpp"
#include "lowrank_align/gan/networks.hpp"
#include "lowrank_align/gan/train.hpp"
#include "lowrank_align/rasl.hpp"
#include "lowrank_align/synthdata.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lowrank_align::cli {

struct EvalSettings {
  double rank_rel_tol = 1e-2;
  /// Residual entries above this magnitude (unit-norm columns) count as corrupted.
  double sparsity_abs_tol = 1e-2;
  /// Report files or directories of reports.jsonl files, for `eval`.
  std::vector<std::string> reports;
};

/// Everything a command needs after defaults are filled in. The JSON form is
/// written next to every command's outputs.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  /// Unset means the command default: 32 for train, 64 otherwise.
  std::optional<int> precision;
  std::string log_level = "info";
  /// Dataset root read by train and align.
  std::string data_dir;

  synth::SyntheticSpec synth;
  Index n_sets = 10;
  rasl::RaslConfig rasl;
  gan::GeneratorConfig generator;
  gan::DiscriminatorConfig discriminator;
  gan::TrainConfig train;
  EvalSettings eval;
  gan::GradCheckConfig gradcheck;

  int precision_or(int fallback) const { return precision.value_or(fallback); }

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys and ill-typed values throw
  /// kConfigError.
  static RunConfig from_json(const nlohmann::json& j);
  /// Cross-field checks (all sub-configs valid, precision 32 or 64).
  void validate() const;
};

/// Throws kConfigError on unreadable or malformed files.
RunConfig load_config(const std::filesystem::path& path);

/// Writes `<output_dir>/config.resolved.json`.
void write_resolved_config(const RunConfig& config, const std::string& command);

}  // namespace lowrank_align::cli
