#include "lowrank_align/cli/commands.hpp"
#include "lowrank_align/cli/config.hpp"
#include "lowrank_align/gan/checkpoint.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lowrank_align;
using namespace lowrank_align::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lowrank_align_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

RunConfig toy_config(const fs::path& data, const fs::path& out) {
  RunConfig c;
  c.seed = 11;
  c.n_sets = 3;
  c.synth.integer_shifts = true;
  c.data_dir = data.string();
  c.output_dir = out.string();
  c.generator = {32, 32, 1, 8, 4, 1};
  c.discriminator.widths = {8, 16};
  c.discriminator.strides = {2, 2};
  c.train.batch_size = 2;
  c.train.max_steps = 10;
  c.train.checkpoint_every = 100;
  return c;
}

// Every file under `dir`, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LOWRANK_ALIGN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(RunConfig, DefaultsAndRoundTrip) {
  const RunConfig d = RunConfig::from_json(nlohmann::json::object());
  EXPECT_EQ(d.generator.height, 160);
  EXPECT_EQ(d.train.batch_size, 16);
  EXPECT_FALSE(d.precision.has_value());
  EXPECT_NO_THROW(d.validate());
  RunConfig c = toy_config("a", "b");
  c.precision = 64;
  c.rasl.lambda = 0.1;
  const RunConfig back = RunConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.rasl.lambda, 0.1);
  EXPECT_EQ(back.discriminator.widths, (std::vector<Index>{8, 16}));
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  auto kind = [](const std::string& text) {
    try {
      RunConfig::from_json(nlohmann::json::parse(text)).validate();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kInvalidArgument;
  };
  EXPECT_EQ(kind(R"({"sed": 1})"), ErrorKind::kConfigError);
  EXPECT_EQ(kind(R"({"train": {"gama": 1}})"), ErrorKind::kConfigError);
  EXPECT_EQ(kind(R"({"seed": "x"})"), ErrorKind::kConfigError);
  EXPECT_EQ(kind(R"({"precision": 16})"), ErrorKind::kConfigError);
  EXPECT_EQ(kind(R"({"synth": {"template_kind": "spiral"}})"), ErrorKind::kConfigError);
  EXPECT_EQ(kind(R"({"generator": {"height": 30}})"), ErrorKind::kConfigError);
  EXPECT_EQ(kind(R"({"log_level": "loud"})"), ErrorKind::kConfigError);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code(ErrorKind::kConfigError), 2);
  EXPECT_EQ(exit_code(ErrorKind::kDecodeError), 3);
  EXPECT_EQ(exit_code(ErrorKind::kCheckpointMissing), 3);
  EXPECT_EQ(exit_code(ErrorKind::kSetSizeMismatch), 3);
  EXPECT_EQ(exit_code(ErrorKind::kNonFiniteLoss), 4);
  EXPECT_EQ(exit_code(ErrorKind::kSvdFailure), 4);
}

TEST(Rle, RoundTrip) {
  synth::Mask m{0, 1, 1, 0, 0, 1, 0, 1, 1, 1};
  const auto runs = encode_rle(m);
  EXPECT_EQ(runs.dump(), "[[1,2],[5,1],[7,3]]");
  EXPECT_EQ(decode_rle(runs, m.size()), m);
  EXPECT_EQ(decode_rle(encode_rle(synth::Mask(5, 0)), 5), synth::Mask(5, 0));
  EXPECT_THROW(decode_rle(nlohmann::json::parse("[[4,3]]"), 5), Error);
}

TEST(CmdSynth, WritesSetsAndIsDeterministic) {
  const fs::path root = fresh_dir("synth");
  RunConfig c = toy_config(root / "a", root / "a");
  cmd_synth(c);
  for (int s = 0; s < 3; ++s) {
    const fs::path dir = root / "a" / ("set_000" + std::to_string(s));
    int pngs = 0;
    for (const auto& e : fs::directory_iterator(dir)) pngs += e.path().extension() == ".png";
    EXPECT_EQ(pngs, 8);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  }
  c.output_dir = (root / "b").string();
  cmd_synth(c);
  EXPECT_EQ(tree(root / "a"), tree(root / "b"));
  c.seed = 12;
  c.output_dir = (root / "c").string();
  cmd_synth(c);
  EXPECT_NE(slurp(root / "a" / "set_0000" / "manifest.json"), slurp(root / "c" / "set_0000" / "manifest.json"));
}

TEST(CmdSynth, ManifestReproducesUnoccludedPixels) {
  const fs::path root = fresh_dir("synth_rewarp");
  RunConfig c = toy_config(root, root);
  c.synth.integer_shifts = false;
  c.synth.max_rotation = 5;
  c.synth.occlusion_prob = 0.7;
  c.synth.corruption_density = 0.03;
  cmd_synth(c);
  const auto tmpl_blob = gan::read_tensor_blob<double>(root / "template.bin");
  Image tmpl(32, 32, 1);
  tmpl.pixels = tmpl_blob.values;
  for (int s = 0; s < 3; ++s) {
    const fs::path dir = root / ("set_000" + std::to_string(s));
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    const auto images = gan::read_tensor_blob<double>(dir / "images.bin");
    const TransformModel model = transform_model_from_string(manifest["model"]);
    for (int j = 0; j < 8; ++j) {
      const auto t = manifest["transforms"][j].get<std::vector<double>>();
      const Image w = warp(tmpl, Eigen::Map<const VectorXd>(t.data(), t.size()), model);
      const double gain = manifest["gains"][j];
      const auto occ = decode_rle(manifest["occlusion_masks"][j], 1024);
      const auto cor = decode_rle(manifest["corruption_masks"][j], 1024);
      double worst = 0.0;
      for (Index p = 0; p < 1024; ++p) {
        if (occ[p] || cor[p]) continue;
        worst = std::max(worst, std::abs(images.values(j * 1024 + p) - gain * w.pixels(p)));
      }
      EXPECT_LE(worst, 1e-6);
    }
  }
}

TEST(LoadDataset, SyntheticCarriesGroundTruth) {
  const fs::path root = fresh_dir("load");
  cmd_synth(toy_config(root, root));
  const auto entries = load_dataset(root, 8, 0);
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[1].id, "set_0001");
  EXPECT_TRUE(entries[1].set.standardized);
  ASSERT_TRUE(entries[1].truth.has_value());
  EXPECT_EQ(entries[1].truth->true_params.theta.rows(), 8);
  try {
    load_dataset(root, 4, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSetSizeMismatch);
  }
}

TEST(CmdTrain, MetricsRowsAndResumeDeterminism) {
  const fs::path root = fresh_dir("train");
  RunConfig c = toy_config(root / "data", root / "data");
  cmd_synth(c);

  c.output_dir = (root / "full").string();
  cmd_train(c, std::nullopt);
  const auto rows = lines_of(root / "full" / "metrics.csv");
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], "step,loss_disc,loss_gen_adv,loss_sparse,grad_norm_G,grad_norm_D");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::stringstream ss(rows[i]);
    std::string cell;
    std::getline(ss, cell, ',');
    EXPECT_EQ(std::stoi(cell), static_cast<int>(i));
    while (std::getline(ss, cell, ',')) EXPECT_TRUE(std::isfinite(std::stod(cell)));
  }

  RunConfig half = c;
  half.train.max_steps = 5;
  half.output_dir = (root / "half").string();
  cmd_train(half, std::nullopt);
  RunConfig rest = c;
  rest.output_dir = (root / "rest").string();
  cmd_train(rest, root / "half" / "checkpoints" / "step_000005");
  EXPECT_EQ(tree(root / "full" / "checkpoints" / "step_000010"), tree(root / "rest" / "checkpoints" / "step_000010"));
}

TEST(CmdAlign, RaslCleanSetAndDeterminism) {
  const fs::path root = fresh_dir("align");
  RunConfig c = toy_config(root / "data", root / "data");
  c.synth.max_shift = 0;
  cmd_synth(c);
  c.output_dir = (root / "x").string();
  cmd_align(c, eval::Method::kRasl, std::nullopt);
  const auto lines = lines_of(root / "x" / "reports.jsonl");
  ASSERT_EQ(lines.size(), 3u);
  for (const auto& line : lines) EXPECT_EQ(eval::EvalReport::from_json_line(line).effective_rank, 1);
  EXPECT_TRUE(fs::exists(root / "x" / "aligned" / "set_0002.png"));
  c.output_dir = (root / "y").string();
  cmd_align(c, eval::Method::kRasl, std::nullopt);
  EXPECT_EQ(tree(root / "x" / "aligned"), tree(root / "y" / "aligned"));
  EXPECT_EQ(slurp(root / "x" / "reports.jsonl"), slurp(root / "y" / "reports.jsonl"));
}

TEST(CmdAlign, GanWithUntrainedCheckpoint) {
  const fs::path root = fresh_dir("align_gan");
  RunConfig c = toy_config(root / "data", root / "data");
  cmd_synth(c);
  c.train.max_steps = 0;
  c.output_dir = (root / "train").string();
  cmd_train(c, std::nullopt);
  const fs::path ckpt = root / "train" / "checkpoints" / "step_000000";
  ASSERT_TRUE(fs::exists(ckpt / "manifest.txt"));
  c.output_dir = (root / "out").string();
  cmd_align(c, eval::Method::kGan, ckpt);
  const auto blob = gan::read_tensor_blob<double>(root / "out" / "aligned" / "set_0000.bin");
  EXPECT_EQ(blob.shape, (std::vector<Index>{1, 1, 32, 32}));
  EXPECT_EQ(lines_of(root / "out" / "reports.jsonl").size(), 3u);
  try {
    cmd_align(c, eval::Method::kGan, std::nullopt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCheckpointMissing);
  }
  EXPECT_THROW(cmd_align(c, eval::Method::kGan, root / "nowhere"), Error);
}

TEST(CmdEval, SummaryRowsAndMedians) {
  const fs::path root = fresh_dir("eval");
  auto report = [](const std::string& id, eval::Method m, Index rank, double sparsity, std::optional<double> shift) {
    eval::EvalReport r;
    r.set_id = id;
    r.method = m;
    r.singular_values = VectorXd::Ones(1);
    r.effective_rank = rank;
    r.residual_sparsity = sparsity;
    r.shift_error_px = shift;
    return r.to_json_line() + "\n";
  };
  std::ofstream(root / "one.jsonl") << report("s0", eval::Method::kRasl, 1, 0.25, 0.5);
  RunConfig c;
  c.output_dir = (root / "single").string();
  c.eval.reports = {(root / "one.jsonl").string()};
  cmd_eval(c);
  auto rows = lines_of(root / "single" / "summary.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], "rasl,1,1,1,0.25,0.25,,,0.5,0.5");

  std::ofstream(root / "many.jsonl") << report("s0", eval::Method::kRasl, 1, 0.1, 0.2)
                                     << report("s1", eval::Method::kRasl, 3, 0.4, 0.1)
                                     << report("s2", eval::Method::kRasl, 2, 0.3, 0.9)
                                     << report("s3", eval::Method::kRasl, 1, 0.2, std::nullopt)
                                     << report("g0", eval::Method::kGan, 1, 0.7, std::nullopt);
  c.output_dir = (root / "many").string();
  c.eval.reports = {(root / "many.jsonl").string()};
  cmd_eval(c);
  rows = lines_of(root / "many" / "summary.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1], "gan,1,1,1,0.7,0.7,,,,");
  // rasl: ranks {1,1,2,3} -> median 1.5, mean 1.75; sparsity {0.1,0.2,0.3,0.4} -> 0.25; shifts {0.1,0.2,0.9} -> 0.2
  std::stringstream ss(rows[2]);
  std::vector<std::string> cells;
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  ASSERT_GE(cells.size(), 10u);
  EXPECT_EQ(cells[0], "rasl");
  EXPECT_EQ(cells[1], "4");
  EXPECT_DOUBLE_EQ(std::stod(cells[2]), 1.5);
  EXPECT_DOUBLE_EQ(std::stod(cells[3]), 1.75);
  EXPECT_NEAR(std::stod(cells[4]), 0.25, 1e-15);
  EXPECT_NEAR(std::stod(cells[5]), 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(std::stod(cells[8]), 0.2);
  EXPECT_NEAR(std::stod(cells[9]), 0.4, 1e-15);
  EXPECT_TRUE(fs::exists(root / "many" / "summary.txt"));
}

TEST(Binary, ExitCodesAndResolvedConfig) {
  const fs::path root = fresh_dir("binary");
  RunConfig c = toy_config(root / "data", root / "data");
  std::ofstream(root / "cfg.json") << c.to_json().dump(2);
  std::ofstream(root / "bad.json") << R"({"sed": 1})";
  std::ofstream(root / "broken.json") << "{";
  const std::string cfg = (root / "cfg.json").string();
  EXPECT_EQ(run_cli("synth --config " + cfg), 0);
  EXPECT_TRUE(fs::exists(root / "data" / "config.resolved.json"));
  EXPECT_EQ(run_cli("synth --config " + (root / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("synth --config " + (root / "broken.json").string()), 2);
  EXPECT_EQ(run_cli("nonsense --config " + cfg), 2);
  EXPECT_EQ(run_cli("synth"), 2);
  EXPECT_EQ(run_cli("align --config " + cfg + " --method gan --out " + (root / "g").string()), 3);
  EXPECT_EQ(run_cli("align --config " + cfg + " --out " + (root / "r").string()), 0);

  // rerunning from the resolved config reproduces the outputs
  const std::string resolved = (root / "r" / "config.resolved.json").string();
  const auto before = slurp(root / "r" / "reports.jsonl");
  EXPECT_EQ(run_cli("align --config " + resolved), 0);
  EXPECT_EQ(slurp(root / "r" / "reports.jsonl"), before);

  fs::create_directories(root / "pngs" / "subject");
  std::ofstream(root / "pngs" / "subject" / "x.png") << "garbage";
  RunConfig bad_data = c;
  bad_data.data_dir = (root / "pngs").string();
  std::ofstream(root / "bad_data.json") << bad_data.to_json().dump();
  EXPECT_EQ(run_cli("align --config " + (root / "bad_data.json").string() + " --out " + (root / "z").string()), 3);
  EXPECT_EQ(run_cli("gradcheck --config " + cfg + " --precision 32 --out " + (root / "gc").string()), 2);
}
