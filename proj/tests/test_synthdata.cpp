#include "lowrank_align/error.hpp"
#include "lowrank_align/eval.hpp"
#include "lowrank_align/png_io.hpp"
#include "lowrank_align/synthdata.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace lowrank_align;
using namespace lowrank_align::synth;
namespace fs = std::filesystem;

namespace {

SyntheticSpec quiet_spec() {
  SyntheticSpec spec;
  spec.max_shift = 0;
  spec.illum_gain_lo = spec.illum_gain_hi = 1.0;
  spec.standardize_output = false;
  spec.seed = 1;
  return spec;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lowrank_align_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_subject(const fs::path& root, const std::string& subject, int count, Index h, Index w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  fs::create_directories(root / subject);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img_%03d.png", i);
    write_png(root / subject / name, testutil::random_image(h, w, 1, rng));
  }
}

}  // namespace

TEST(MakeTemplate, DiskIsCenteredWithRadiusTen) {
  const Image disk = make_template(TemplateKind::kDisk, 32, 32, 1);
  EXPECT_GT(disk.at(16, 16), 0.99);
  EXPECT_LT(disk.at(0, 0), 0.01);
  // radius 10 about the center (15.5, 15.5): inside at distance 8, outside at 12
  EXPECT_GT(disk.at(15, 15 + 8), 0.95);
  EXPECT_LT(disk.at(15, 15 + 12), 0.05);
  for (Index i = 0; i < disk.size(); ++i) {
    EXPECT_GE(disk.pixels(i), 0.0);
    EXPECT_LE(disk.pixels(i), 1.0);
  }
}

TEST(MakeTemplate, DeterministicAndStructured) {
  for (auto kind : {TemplateKind::kBars, TemplateKind::kDisk, TemplateKind::kChecker, TemplateKind::kGlyph}) {
    const Image a = make_template(kind, 24, 20, 3);
    EXPECT_TRUE(a == make_template(kind, 24, 20, 3));
    EXPECT_GT(std::sqrt(a.pixels.array().square().mean() - std::pow(a.pixels.mean(), 2)), 0.1) << to_string(kind);
    const Image s = standardize(a).image;
    EXPECT_GT(std::sqrt(s.pixels.array().square().mean()), 0.1);
    bool varies_x = false, varies_y = false;
    for (Index y = 0; y < a.height; ++y)
      for (Index x = 1; x < a.width; ++x) varies_x |= a.at(y, x) != a.at(y, x - 1);
    for (Index y = 1; y < a.height; ++y)
      for (Index x = 0; x < a.width; ++x) varies_y |= a.at(y, x) != a.at(y - 1, x);
    EXPECT_TRUE(varies_x && varies_y) << to_string(kind);
  }
}

TEST(MakeTemplate, KindNames) {
  EXPECT_EQ(template_kind_from_string("glyph"), TemplateKind::kGlyph);
  EXPECT_EQ(to_string(TemplateKind::kChecker), "checker");
  try {
    template_kind_from_string("spiral");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownKind);
  }
}

TEST(SyntheticSpec, RejectsMalformedRanges) {
  SyntheticSpec spec;
  spec.illum_gain_lo = 1.3;
  EXPECT_THROW(spec.validate(), Error);
  spec = SyntheticSpec{};
  spec.occlusion_frac = 0.6;
  EXPECT_THROW(spec.validate(), Error);
  spec = SyntheticSpec{};
  spec.max_shift = -1;
  EXPECT_THROW(spec.validate(), Error);
  spec = SyntheticSpec{};
  spec.corruption_density = 1.5;
  EXPECT_THROW(spec.validate(), Error);
}

TEST(GenerateSet, NoPerturbationGivesTemplateCopies) {
  const auto [set, truth] = generate_set(quiet_spec());
  ASSERT_EQ(set.size(), 8);
  for (const Image& img : set.images) EXPECT_TRUE(img == truth.clean_template);
  EXPECT_EQ(eval::effective_rank(flatten_stack(set).data), 1);
}

TEST(GenerateSet, StandardizedCopiesStayRankOne) {
  SyntheticSpec spec = quiet_spec();
  spec.standardize_output = true;
  const auto [set, truth] = generate_set(spec);
  EXPECT_TRUE(set.standardized);
  EXPECT_EQ(eval::effective_rank(flatten_stack(set).data), 1);
  for (const Image& img : set.images) {
    EXPECT_NEAR(img.pixels.mean(), 0.0, 1e-6);
    EXPECT_NEAR(std::sqrt(img.pixels.array().square().mean()), 1.0, 1e-6);
  }
}

TEST(GenerateSet, SeedDeterminism) {
  SyntheticSpec spec;
  spec.seed = 99;
  spec.occlusion_prob = 0.5;
  spec.corruption_density = 0.05;
  spec.max_rotation = 5;
  const auto a = generate_set(spec);
  const auto b = generate_set(spec);
  for (Index j = 0; j < a.first.size(); ++j) EXPECT_TRUE(a.first.images[j] == b.first.images[j]);
  EXPECT_EQ(a.second.true_params.theta, b.second.true_params.theta);
  EXPECT_EQ(a.second.occlusion_masks, b.second.occlusion_masks);
  spec.seed = 100;
  EXPECT_NE(generate_set(spec).second.true_params.theta, a.second.true_params.theta);
}

TEST(GenerateSet, IntegerShiftsStayInRange) {
  SyntheticSpec spec;
  spec.integer_shifts = true;
  spec.seed = 4;
  const auto [set, truth] = generate_set(spec);
  for (Index i = 0; i < truth.true_params.theta.size(); ++i) {
    const double v = truth.true_params.theta.data()[i];
    EXPECT_EQ(v, std::round(v));
    EXPECT_LE(std::abs(v), 3.0);
  }
}

TEST(GenerateSet, FullOcclusionProbabilityMasksEveryImage) {
  SyntheticSpec spec = quiet_spec();
  spec.max_shift = 2;
  spec.occlusion_prob = 1.0;
  spec.occlusion_frac = 0.2;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    spec.seed = seed;
    const auto [set, truth] = generate_set(spec);
    for (Index j = 0; j < set.size(); ++j) {
      const Image clean = warp(truth.clean_template, truth.true_params.theta.row(j).transpose(), truth.true_params.model);
      const Mask& mask = truth.occlusion_masks[j];
      Index covered = 0;
      for (Index p = 0; p < 32 * 32; ++p) {
        if (!mask[p]) continue;
        ++covered;
        EXPECT_NE(set.images[j].pixels(p), truth.gains(j) * clean.pixels(p));
      }
      EXPECT_GT(covered, 0);
      // area bound with one row plus one column of rounding slack
      EXPECT_LE(covered, 0.2 * 32 * 32 + 32 + 32);
    }
  }
}

TEST(GenerateSet, CorruptionSupportMatchesGroundTruth) {
  SyntheticSpec spec;
  spec.standardize_output = false;
  spec.occlusion_prob = 0.6;
  spec.corruption_density = 0.05;
  spec.channels = 3;
  spec.max_rotation = 4;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.seed = seed;
    const auto [set, truth] = generate_set(spec);
    for (Index j = 0; j < set.size(); ++j) {
      Image clean = warp(truth.clean_template, truth.true_params.theta.row(j).transpose(), truth.true_params.model);
      clean.pixels *= truth.gains(j);
      for (Index p = 0; p < 32 * 32; ++p) {
        bool differs = false;
        for (Index ch = 0; ch < 3; ++ch) differs |= set.images[j].pixels(ch * 1024 + p) != clean.pixels(ch * 1024 + p);
        const bool expected = truth.occlusion_masks[j][p] || truth.corruption_masks[j][p];
        EXPECT_EQ(differs, expected) << "seed " << seed << " image " << j << " pixel " << p;
      }
    }
  }
}

TEST(Ingest, SeventeenImagesGiveTwoSets) {
  const fs::path root = fresh_dir("ingest17");
  write_subject(root, "alice", 17, 6, 5, 1);
  const IngestResult r = ingest_directory(root, 8, 42);
  ASSERT_EQ(r.sets.size(), 2u);
  for (const auto& set : r.sets) {
    EXPECT_EQ(set.size(), 8);
    EXPECT_EQ(set.subject_id, "alice");
    EXPECT_TRUE(set.standardized);
    EXPECT_NO_THROW(set.validate());
  }
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Ingest, SameSeedSamePartition) {
  const fs::path root = fresh_dir("ingest_seed");
  write_subject(root, "a", 16, 4, 4, 2);
  write_subject(root, "b", 9, 4, 4, 3);
  const IngestResult x = ingest_directory(root, 4, 7);
  const IngestResult y = ingest_directory(root, 4, 7);
  ASSERT_EQ(x.sets.size(), 6u);
  ASSERT_EQ(x.sets.size(), y.sets.size());
  for (std::size_t s = 0; s < x.sets.size(); ++s)
    for (Index j = 0; j < 4; ++j) EXPECT_TRUE(x.sets[s].images[j] == y.sets[s].images[j]);
  const IngestResult z = ingest_directory(root, 4, 8);
  bool any_diff = false;
  for (std::size_t s = 0; s < x.sets.size(); ++s)
    for (Index j = 0; j < 4; ++j) any_diff |= !(x.sets[s].images[j] == z.sets[s].images[j]);
  EXPECT_TRUE(any_diff);
}

TEST(Ingest, TooFewImagesWarnsAndEmitsNothing) {
  const fs::path root = fresh_dir("ingest7");
  write_subject(root, "bob", 7, 4, 4, 4);
  const IngestResult r = ingest_directory(root, 8, 1);
  EXPECT_TRUE(r.sets.empty());
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("bob"), std::string::npos);
}

TEST(Ingest, ErrorKinds) {
  auto kind_of = [](const fs::path& root) {
    try {
      ingest_directory(root, 2, 0);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kInvalidArgument;
  };
  const fs::path empty = fresh_dir("ingest_empty");
  fs::create_directories(empty / "nobody");
  EXPECT_EQ(kind_of(empty), ErrorKind::kEmptySubject);

  const fs::path ragged = fresh_dir("ingest_ragged");
  write_subject(ragged, "carol", 2, 4, 4, 5);
  std::mt19937_64 rng(1);
  write_png(ragged / "carol" / "odd.png", testutil::random_image(5, 4, 1, rng));
  EXPECT_EQ(kind_of(ragged), ErrorKind::kSizeMismatch);

  const fs::path broken = fresh_dir("ingest_broken");
  write_subject(broken, "dave", 2, 4, 4, 6);
  std::ofstream(broken / "dave" / "bad.png") << "not a png";
  EXPECT_EQ(kind_of(broken), ErrorKind::kDecodeError);
}

TEST(PngIo, RoundTripAtEightBits) {
  const fs::path dir = fresh_dir("png");
  std::mt19937_64 rng(3);
  const Image rgb = testutil::random_image(5, 7, 3, rng);
  write_png(dir / "rgb.png", rgb);
  const Image back = read_png(dir / "rgb.png");
  ASSERT_TRUE(back.same_shape(rgb));
  EXPECT_LE((back.pixels - rgb.pixels).cwiseAbs().maxCoeff(), 0.5 / 255.0 + 1e-12);
}
