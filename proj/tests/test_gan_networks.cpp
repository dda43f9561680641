#include "lowrank_align/error.hpp"
#include "lowrank_align/gan/data.hpp"
#include "lowrank_align/gan/networks.hpp"
#include "lowrank_align/gan/train.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace lowrank_align;
using namespace lowrank_align::gan;

namespace {

GeneratorConfig toy_generator(Index h, Index w, Index c, Index n) {
  GeneratorConfig g;
  g.height = h;
  g.width = w;
  g.channels = c;
  g.set_size = n;
  g.base_width = 4;
  g.n_res_blocks = 1;
  return g;
}

FeatureMap<double> random_map(Index c, Index h, Index w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  FeatureMap<double> m(c, h, w);
  for (Index i = 0; i < m.data.size(); ++i) m.data.data()[i] = unit(rng);
  return m;
}

// Layer-by-layer output size with kernel 4, pad 1.
Index size_by_hand(Index in, const std::vector<Index>& strides) {
  for (Index s : strides) in = (in + 2 - 4) / s + 1;
  return in;
}

}  // namespace

TEST(GeneratorConfig, Validation) {
  EXPECT_NO_THROW(GeneratorConfig{}.validate());
  GeneratorConfig g;
  g.height = 158;
  EXPECT_THROW(g.validate(), Error);
  g = GeneratorConfig{};
  g.n_res_blocks = 0;
  EXPECT_THROW(g.validate(), Error);
}

TEST(Generator, ToyShapeContractAndRange) {
  std::mt19937_64 rng(1);
  for (auto [h, w] : {std::pair<Index, Index>{32, 32}, {16, 24}, {8, 12}}) {
    const Generator<double> gen(toy_generator(h, w, 1, 8));
    const auto params = gen.init_parameters(rng, 0.5);
    const auto out = gen.forward(params, random_map(8, h, w, rng), nullptr);
    EXPECT_EQ(out.channels, 1);
    EXPECT_EQ(out.height, h);
    EXPECT_EQ(out.width, w);
    EXPECT_LE(out.data.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Generator, RejectsWrongInput) {
  std::mt19937_64 rng(2);
  const Generator<double> gen(toy_generator(16, 16, 1, 4));
  const auto params = gen.init_parameters(rng);
  try {
    gen.forward(params, random_map(3, 16, 16, rng), nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShapeMismatch);
  }
}

TEST(Generator, ParameterLayout) {
  const Generator<float> gen(toy_generator(16, 16, 3, 2));
  const auto& layout = gen.layout();
  EXPECT_EQ(layout[layout.find("enc0.weight")].shape, (std::vector<Index>{4, 6, 7, 7}));
  EXPECT_EQ(layout[layout.find("enc1.weight")].shape, (std::vector<Index>{8, 4, 3, 3}));
  EXPECT_EQ(layout[layout.find("enc2.weight")].shape, (std::vector<Index>{16, 8, 3, 3}));
  EXPECT_EQ(layout[layout.find("res0.conv0.weight")].shape, (std::vector<Index>{16, 16, 3, 3}));
  EXPECT_EQ(layout[layout.find("dec0.weight")].shape, (std::vector<Index>{16, 8, 3, 3}));
  EXPECT_EQ(layout[layout.find("dec1.weight")].shape, (std::vector<Index>{8, 4, 3, 3}));
  EXPECT_EQ(layout[layout.find("out.weight")].shape, (std::vector<Index>{3, 4, 7, 7}));
  EXPECT_GE(layout.find("out.bias"), 0);
}

TEST(Generator, InitIsGaussianWithZeroBias) {
  std::mt19937_64 rng(3);
  GeneratorConfig cfg = toy_generator(16, 16, 1, 8);
  cfg.base_width = 16;
  const Generator<double> gen(cfg);
  const auto params = gen.init_parameters(rng);
  const auto& w = params[params.find("res0.conv0.weight")].values;
  const double mean = w.mean();
  const double sd = std::sqrt((w.array() - mean).square().mean());
  EXPECT_NEAR(mean, 0.0, 0.002);
  EXPECT_NEAR(sd, 0.02, 0.002);
  EXPECT_EQ(params[params.find("out.bias")].values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(params.all_finite());

  std::mt19937_64 a(9), b(9);
  const Generator<float> genf(cfg);
  const auto pf = genf.init_parameters(a);
  const auto pd = gen.init_parameters(b);
  for (Index t = 0; t < pd.size(); ++t) EXPECT_EQ(pf[t].values, pd[t].values.cast<float>());
}

TEST(Discriminator, ReceptiveFieldAndScoreSizes) {
  const DiscriminatorConfig d;
  EXPECT_EQ(d.receptive_field(), 70);
  EXPECT_EQ(d.output_size(160), size_by_hand(160, {2, 2, 2, 1, 1}));
  EXPECT_EQ(d.output_size(160), 18);
  EXPECT_EQ(d.output_size(256), 30);
  EXPECT_EQ(d.output_size(256), size_by_hand(256, {2, 2, 2, 1, 1}));
  DiscriminatorConfig small;
  small.widths = {4, 8};
  small.strides = {2, 1};
  EXPECT_EQ(small.receptive_field(), 16);
  DiscriminatorConfig mid;
  mid.widths = {16, 32};
  mid.strides = {2, 2};
  EXPECT_EQ(mid.receptive_field(), 22);
  EXPECT_EQ(mid.output_size(32), 7);
}

TEST(Discriminator, ForwardShapesAndSmallInput) {
  std::mt19937_64 rng(4);
  DiscriminatorConfig cfg;
  cfg.widths = {4, 8};
  cfg.strides = {2, 1};
  const Discriminator<double> disc(cfg);
  const auto params = disc.init_parameters(rng);
  const auto scores = disc.forward(params, random_map(1, 16, 20, rng), nullptr);
  EXPECT_EQ(scores.channels, 1);
  EXPECT_EQ(scores.height, cfg.output_size(16));
  EXPECT_EQ(scores.width, cfg.output_size(20));
  try {
    disc.forward(params, random_map(1, 15, 20, rng), nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInputTooSmall);
  }
  const Discriminator<double> full{DiscriminatorConfig{}};
  const auto full_params = full.init_parameters(rng);
  EXPECT_THROW(full.forward(full_params, random_map(1, 69, 80, rng), nullptr), Error);
}

TEST(Discriminator, ParameterLayout) {
  const Discriminator<double> disc{DiscriminatorConfig{}};
  const auto& l = disc.layout();
  EXPECT_EQ(l[l.find("conv0.weight")].shape, (std::vector<Index>{64, 1, 4, 4}));
  EXPECT_GE(l.find("conv0.bias"), 0);
  EXPECT_LT(l.find("conv1.bias"), 0);
  EXPECT_EQ(l[l.find("conv3.weight")].shape, (std::vector<Index>{512, 256, 4, 4}));
  EXPECT_EQ(l[l.find("score.weight")].shape, (std::vector<Index>{1, 512, 4, 4}));
}

TEST(ConcatChannels, OrderAndRoundTrip) {
  std::mt19937_64 rng(5);
  const ImageSet set = testutil::random_set(2, 4, 5, 1, rng);
  const auto m = concat_channels<double>(set, 2);
  EXPECT_EQ(m.channels, 2);
  EXPECT_EQ(m.data.row(0).transpose(), set.images[0].pixels);
  EXPECT_EQ(m.data.row(1).transpose(), set.images[1].pixels);
  const ImageSet rgb = testutil::random_set(3, 4, 4, 3, rng);
  const auto mr = concat_channels<double>(rgb, 3);
  for (Index j = 0; j < 3; ++j) EXPECT_TRUE(to_image(channel_slice(mr, j * 3, 3)) == rgb.images[j]);
  try {
    concat_channels<double>(rgb, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSetSizeMismatch);
  }
}

TEST(ConcatChannels, FullSizeShape) {
  std::mt19937_64 rng(6);
  const ImageSet set = testutil::random_set(8, 160, 160, 3, rng);
  const auto m = concat_channels<float>(set, 8);
  EXPECT_EQ(m.channels, 24);
  EXPECT_EQ(m.height, 160);
  EXPECT_EQ(m.width, 160);
}

TEST(RangeMap, MapsSetOntoUnitInterval) {
  std::mt19937_64 rng(7);
  ImageSet set = testutil::random_set(3, 5, 5, 1, rng);
  set.images[1].pixels(4) = -3.0;
  set.images[2].pixels(0) = 5.0;
  const RangeMap r = fit_range_map(set);
  EXPECT_DOUBLE_EQ(r.apply(-3.0), -1.0);
  EXPECT_DOUBLE_EQ(r.apply(5.0), 1.0);
  EXPECT_NEAR(r.invert(r.apply(0.37)), 0.37, 1e-15);
  const auto prepared = prepare_set<double>(set, 3);
  EXPECT_NEAR(prepared.input.data.minCoeff(), -1.0, 1e-15);
  EXPECT_NEAR(prepared.input.data.maxCoeff(), 1.0, 1e-15);
  const Image back = export_image(channel_slice(prepared.input, 1, 1), prepared.range);
  EXPECT_LT((back.pixels - set.images[1].pixels).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AlignGan, DeterministicShapeAndSetSize) {
  std::mt19937_64 rng(8);
  const Generator<double> gen(toy_generator(16, 16, 1, 4));
  const auto params = gen.init_parameters(rng);
  const ImageSet set = testutil::random_set(4, 16, 16, 1, rng);
  const Image a = align_gan(gen, params, set);
  EXPECT_EQ(a.height, 16);
  EXPECT_EQ(a.width, 16);
  EXPECT_EQ(a.channels, 1);
  EXPECT_TRUE(a == align_gan(gen, params, set));
  EXPECT_THROW(align_gan(gen, params, testutil::random_set(3, 16, 16, 1, rng)), Error);
}
