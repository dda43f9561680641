#pragma once

#include "lowrank_align/core.hpp"
#include "lowrank_align/transform.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lowrank_align::synth {

enum class TemplateKind { kBars, kDisk, kChecker, kGlyph };

std::string to_string(TemplateKind kind);
/// Throws kUnknownKind.
TemplateKind template_kind_from_string(const std::string& name);

/// Deterministic template with values in [0, 1]. The disk template is a
/// bright disk of radius 10/32 * min(h, w) with a soft one-pixel edge.
Image make_template(TemplateKind kind, Index height, Index width, Index channels);

struct SyntheticSpec {
  TemplateKind template_kind = TemplateKind::kDisk;
  Index height = 32;
  Index width = 32;
  Index channels = 1;
  Index set_size = 8;
  double max_shift = 3.0;       // pixels, per axis
  bool integer_shifts = false;  // round shifts to whole pixels
  double max_rotation = 0.0;    // degrees
  double illum_gain_lo = 0.8;
  double illum_gain_hi = 1.2;
  double occlusion_prob = 0.0;
  double occlusion_frac = 0.1;  // of h*w, at most 0.5
  double corruption_density = 0.0;
  bool standardize_output = true;
  std::uint64_t seed = 0;

  /// Throws kInvalidArgument when a range is malformed.
  void validate() const;
};

/// Per-pixel masks, row-major h x w.
using Mask = std::vector<std::uint8_t>;

struct GroundTruth {
  /// Generating transforms: image j is warp(clean_template, true_params.theta.row(j)).
  TransformParams true_params;
  VectorXd gains;
  std::vector<Mask> occlusion_masks;
  /// Salt-and-pepper pixels whose value differs from the clean warped value.
  std::vector<Mask> corruption_masks;
  Image clean_template;
};

std::pair<ImageSet, GroundTruth> generate_set(const SyntheticSpec& spec);

struct IngestResult {
  std::vector<ImageSet> sets;
  std::vector<std::string> warnings;
};

/// Reads `<root>/<subject>/*.png`, shuffles each subject's images with a seed
/// derived from `seed` and the subject name, and cuts them into sets of exactly
/// `set_size`; leftovers are dropped. Every image is standardized.
/// Throws kEmptySubject (subject directory without PNGs), kSizeMismatch, kDecodeError.
IngestResult ingest_directory(const std::filesystem::path& root, Index set_size, std::uint64_t seed);

}  // namespace lowrank_align::synth
