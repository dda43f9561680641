#include "lowrank_align/synthdata.hpp"

#include "lowrank_align/error.hpp"
#include "lowrank_align/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lowrank_align::synth {

namespace fs = std::filesystem;

std::string to_string(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::kBars: return "bars";
    case TemplateKind::kDisk: return "disk";
    case TemplateKind::kChecker: return "checker";
    case TemplateKind::kGlyph: return "glyph";
  }
  return "unknown";
}

TemplateKind template_kind_from_string(const std::string& name) {
  if (name == "bars") return TemplateKind::kBars;
  if (name == "disk") return TemplateKind::kDisk;
  if (name == "checker") return TemplateKind::kChecker;
  if (name == "glyph") return TemplateKind::kGlyph;
  throw Error(ErrorKind::kUnknownKind, "unknown template kind '" + name + "'");
}

namespace {

constexpr double kEdgeScale = 0.5;  // pixels

double soft_inside(double signed_distance) {
  return 1.0 / (1.0 + std::exp(signed_distance / kEdgeScale));
}

// Axis-aligned box in fractional image coordinates.
struct Box {
  double x0, x1, y0, y1;
};

double soft_box(const Box& box, double x, double y, double w, double h) {
  const double dx = std::max(box.x0 * w - x, x - box.x1 * w);
  const double dy = std::max(box.y0 * h - y, y - box.y1 * h);
  return soft_inside(dx) * soft_inside(dy);
}

double soft_union(const std::vector<Box>& boxes, double x, double y, double w, double h) {
  double v = 0.0;
  for (const Box& box : boxes) v = std::max(v, soft_box(box, x, y, w, h));
  return v;
}

}  // namespace

Image make_template(TemplateKind kind, Index height, Index width, Index channels) {
  if (height < 1 || width < 1 || channels < 1) {
    throw Error(ErrorKind::kInvalidArgument, "template dimensions must be positive");
  }
  const double h = static_cast<double>(height);
  const double w = static_cast<double>(width);
  const double cx = 0.5 * (w - 1);
  const double cy = 0.5 * (h - 1);
  static const std::vector<Box> kBarBoxes = {
      {0.15, 0.25, 0.2, 0.8}, {0.45, 0.55, 0.2, 0.8}, {0.75, 0.85, 0.2, 0.8}, {0.1, 0.9, 0.62, 0.7}};
  static const std::vector<Box> kGlyphBoxes = {
      {0.3, 0.42, 0.2, 0.8}, {0.3, 0.72, 0.2, 0.32}, {0.3, 0.62, 0.45, 0.56}};

  Image image(height, width, channels);
  for (Index y = 0; y < height; ++y) {
    for (Index x = 0; x < width; ++x) {
      const double px = static_cast<double>(x);
      const double py = static_cast<double>(y);
      double v = 0.0;
      switch (kind) {
        case TemplateKind::kDisk: {
          const double radius = 10.0 / 32.0 * std::min(h, w);
          v = soft_inside(std::hypot(px - cx, py - cy) - radius);
          break;
        }
        case TemplateKind::kBars:
          v = soft_union(kBarBoxes, px + 0.5, py + 0.5, w, h);
          break;
        case TemplateKind::kChecker: {
          const double cell = std::max(2.0, std::min(h, w) / 4.0);
          const double s = std::sin(std::numbers::pi * (px + 0.5) / cell) * std::sin(std::numbers::pi * (py + 0.5) / cell);
          v = 0.5 + 0.5 * std::tanh(3.0 * s);
          break;
        }
        case TemplateKind::kGlyph:
          v = soft_union(kGlyphBoxes, px + 0.5, py + 0.5, w, h);
          break;
      }
      for (Index ch = 0; ch < channels; ++ch) image.at(y, x, ch) = v * (1.0 - 0.15 * static_cast<double>(ch));
    }
  }
  return image;
}

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, "synthetic spec: " + what); };
  if (height < 1 || width < 1 || channels < 1) fail("dimensions must be positive");
  if (set_size < 1) fail("set_size must be positive");
  if (!(max_shift >= 0)) fail("max_shift must be >= 0");
  if (!(max_rotation >= 0)) fail("max_rotation must be >= 0");
  if (!(illum_gain_lo > 0) || !(illum_gain_lo <= illum_gain_hi)) fail("illumination gain range must satisfy 0 < lo <= hi");
  if (!(occlusion_prob >= 0 && occlusion_prob <= 1)) fail("occlusion_prob must lie in [0, 1]");
  if (!(occlusion_frac >= 0 && occlusion_frac <= 0.5)) fail("occlusion_frac must lie in [0, 0.5]");
  if (!(corruption_density >= 0 && corruption_density <= 1)) fail("corruption_density must lie in [0, 1]");
}

std::pair<ImageSet, GroundTruth> generate_set(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const Index n = spec.set_size;
  const Index h = spec.height;
  const Index w = spec.width;
  const Index plane = h * w;
  const TransformModel model = spec.max_rotation > 0 ? TransformModel::kSimilarity : TransformModel::kTranslation;

  GroundTruth truth;
  truth.clean_template = make_template(spec.template_kind, h, w, spec.channels);
  truth.true_params = TransformParams::zeros(model, n);
  truth.gains.resize(n);
  truth.occlusion_masks.assign(n, Mask(plane, 0));
  truth.corruption_masks.assign(n, Mask(plane, 0));

  ImageSet set;
  set.subject_id = "synthetic-" + std::to_string(spec.seed);
  set.images.reserve(n);
  const Index max_int_shift = static_cast<Index>(std::floor(spec.max_shift));

  for (Index j = 0; j < n; ++j) {
    double tx = 0.0;
    double ty = 0.0;
    if (spec.integer_shifts) {
      std::uniform_int_distribution<Index> shift(-max_int_shift, max_int_shift);
      tx = static_cast<double>(shift(rng));
      ty = static_cast<double>(shift(rng));
    } else {
      tx = uniform(-spec.max_shift, spec.max_shift);
      ty = uniform(-spec.max_shift, spec.max_shift);
    }
    VectorXd theta(parameter_count(model));
    if (model == TransformModel::kTranslation) {
      theta << tx, ty;
    } else {
      const double angle = uniform(-spec.max_rotation, spec.max_rotation) * std::numbers::pi / 180.0;
      theta << std::cos(angle) - 1.0, std::sin(angle), tx, ty;
    }
    truth.true_params.theta.row(j) = theta.transpose();
    const double gain = uniform(spec.illum_gain_lo, spec.illum_gain_hi);
    truth.gains(j) = gain;

    Image clean = warp(truth.clean_template, theta, model);
    clean.pixels *= gain;
    Image observed = clean;

    // Salt-and-pepper first so the occlusion patch always wins where they overlap.
    Mask& corrupted = truth.corruption_masks[j];
    for (Index p = 0; p < plane; ++p) {
      if (spec.corruption_density > 0 && unit(rng) < spec.corruption_density) {
        const double value = unit(rng) < 0.5 ? 0.0 : 1.0;
        for (Index ch = 0; ch < spec.channels; ++ch) {
          observed.pixels(ch * plane + p) = value;
          if (value != clean.pixels(ch * plane + p)) corrupted[p] = 1;
        }
      }
    }

    if (spec.occlusion_prob > 0 && spec.occlusion_frac > 0 && unit(rng) < spec.occlusion_prob) {
      const double area = spec.occlusion_frac * static_cast<double>(plane);
      const double aspect = std::exp(uniform(std::log(0.5), std::log(2.0)));
      const Index rect_h = std::clamp<Index>(std::lround(std::sqrt(area / aspect)), 1, h);
      const Index rect_w = std::clamp<Index>(std::lround(area / static_cast<double>(rect_h)), 1, w);
      const Index top = std::uniform_int_distribution<Index>(0, h - rect_h)(rng);
      const Index left = std::uniform_int_distribution<Index>(0, w - rect_w)(rng);
      const double intensity = unit(rng);
      for (Index y = top; y < top + rect_h; ++y) {
        for (Index x = left; x < left + rect_w; ++x) {
          truth.occlusion_masks[j][y * w + x] = 1;
          for (Index ch = 0; ch < spec.channels; ++ch) observed.at(y, x, ch) = intensity;
        }
      }
    }
    set.images.push_back(std::move(observed));
  }
  if (spec.standardize_output) standardize_set(set);
  return {std::move(set), std::move(truth)};
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace

IngestResult ingest_directory(const fs::path& root, Index set_size, std::uint64_t seed) {
  if (set_size < 1) throw Error(ErrorKind::kInvalidArgument, "set_size must be positive");
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorKind::kIoError, root.string() + " is not a directory");

  std::vector<fs::path> subjects;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) subjects.push_back(entry.path());
  }
  std::sort(subjects.begin(), subjects.end());

  IngestResult result;
  for (const fs::path& subject_dir : subjects) {
    const std::string subject = subject_dir.filename().string();
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(subject_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::kEmptySubject, "subject '" + subject + "' has no PNG images");

    std::vector<Image> images;
    images.reserve(files.size());
    for (const fs::path& file : files) {
      Image image = read_png(file);
      if (!images.empty() && !image.same_shape(images.front())) {
        throw Error(ErrorKind::kSizeMismatch, "subject '" + subject + "': " + file.filename().string() +
                                                  " differs in size from " + files.front().filename().string());
      }
      images.push_back(std::move(image));
    }

    const Index count = static_cast<Index>(images.size());
    if (count < set_size) {
      result.warnings.push_back("EmptySubject: subject '" + subject + "' has " + std::to_string(count) +
                                " images, fewer than set size " + std::to_string(set_size) + "; no sets emitted");
      continue;
    }
    std::mt19937_64 rng(seed ^ fnv1a(subject));
    std::shuffle(images.begin(), images.end(), rng);

    const Index n_sets = count / set_size;
    for (Index s = 0; s < n_sets; ++s) {
      ImageSet set;
      set.subject_id = subject;
      for (Index k = 0; k < set_size; ++k) set.images.push_back(images[s * set_size + k]);
      standardize_set(set);
      result.sets.push_back(std::move(set));
    }
  }
  return result;
}

}  // namespace lowrank_align::synth
