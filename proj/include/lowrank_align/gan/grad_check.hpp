#pragma once

#include "lowrank_align/gan/networks.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lowrank_align::gan {

/// Finite-difference check of the analytic gradients, always in 64-bit.
struct GradCheckConfig {
  GeneratorConfig gen{16, 16, 1, 4, 4, 1};
  DiscriminatorConfig disc{{4, 8}, {2, 1}, 4, 1, 1};
  double gamma = 2e-5;
  Index batch_size = 2;
  int coords_per_tensor = 20;
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Relative errors divide by max(|analytic|, |numeric|, this floor).
  double magnitude_floor = 1e-7;
  std::uint64_t seed = 7;

  /// Throws kInvalidArgument unless the networks are toy-sized (images at most
  /// 16x16, base width at most 4, one residual block).
  void validate() const;
};

struct TensorCheck {
  std::string objective;  // loss_sparse | loss_gan_ls_gen | loss_full | loss_gan_ls_disc
  std::string tensor;     // "gen/<name>" or "disc/<name>"
  int checked = 0;
  int skipped_kinks = 0;  // probes whose +-step crossed a rectifier or |.| kink
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<TensorCheck> checks;
  double tolerance = 0.0;
  double max_rel_error = 0.0;
  bool passed = false;

  double max_rel_error_for(const std::string& objective) const;
  std::string to_json() const;
};

GradCheckReport grad_check(const GradCheckConfig& config);

}  // namespace lowrank_align::gan
