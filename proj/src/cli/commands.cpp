#include "lowrank_align/cli/commands.hpp"

#include "lowrank_align/gan/checkpoint.hpp"
#include "lowrank_align/gan/grad_check.hpp"
#include "lowrank_align/gan/train.hpp"
#include "lowrank_align/png_io.hpp"
#include "lowrank_align/rasl.hpp"

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace lowrank_align::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDatasetFormat = "lowrank-align-synth/1";

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIoError, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIoError, "malformed " + path.string() + ": " + e.what());
  }
}

gan::Tensor<double> image_tensor(const std::vector<Image>& images) {
  gan::Tensor<double> t;
  const Image& first = images.front();
  t.shape = {static_cast<Index>(images.size()), first.channels, first.height, first.width};
  t.values.resize(t.size());
  for (std::size_t j = 0; j < images.size(); ++j) t.values.segment(j * first.size(), first.size()) = images[j].pixels;
  return t;
}

std::vector<Image> tensor_images(const gan::Tensor<double>& t, const fs::path& source) {
  if (t.shape.size() != 4) throw Error(ErrorKind::kDecodeError, source.string() + " is not an n x c x h x w blob");
  std::vector<Image> images;
  for (Index j = 0; j < t.shape[0]; ++j) {
    Image img(t.shape[2], t.shape[3], t.shape[1]);
    img.pixels = t.values.segment(j * img.size(), img.size());
    images.push_back(std::move(img));
  }
  return images;
}

// Min-max stretch into [0, 1] for viewing; constant images map to 0.5.
Image display_image(const Image& img) {
  Image out = img;
  const double lo = img.pixels.minCoeff();
  const double hi = img.pixels.maxCoeff();
  if (hi - lo < 1e-12) {
    out.pixels.setConstant(0.5);
  } else {
    out.pixels = (img.pixels.array() - lo) / (hi - lo);
  }
  return out;
}

std::string format_step_dir(std::int64_t step) { return fmt::format("step_{:06d}", step); }

std::uint64_t set_seed(std::uint64_t seed, Index index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfigError:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kUnknownKind:
      return 2;
    case ErrorKind::kEmptySubject:
    case ErrorKind::kSizeMismatch:
    case ErrorKind::kDecodeError:
    case ErrorKind::kIoError:
    case ErrorKind::kSetSizeMismatch:
    case ErrorKind::kCheckpointMissing:
    case ErrorKind::kShapeMismatch:
    case ErrorKind::kInputTooSmall:
    case ErrorKind::kModelMismatch:
      return 3;
    case ErrorKind::kSvdFailure:
    case ErrorKind::kDegenerateTransform:
    case ErrorKind::kDivergedTransform:
    case ErrorKind::kMaxIterations:
    case ErrorKind::kNonFiniteLoss:
    case ErrorKind::kZeroMatrix:
      return 4;
  }
  return 4;
}

json encode_rle(const synth::Mask& mask) {
  json runs = json::array();
  std::size_t i = 0;
  while (i < mask.size()) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < mask.size() && mask[end]) ++end;
    runs.push_back({i, end - i});
    i = end;
  }
  return runs;
}

synth::Mask decode_rle(const json& runs, std::size_t size) {
  synth::Mask mask(size, 0);
  for (const auto& run : runs) {
    const auto start = run.at(0).get<std::size_t>();
    const auto length = run.at(1).get<std::size_t>();
    if (start + length > size) throw Error(ErrorKind::kDecodeError, "mask run exceeds image size");
    std::fill(mask.begin() + start, mask.begin() + start + length, 1);
  }
  return mask;
}

// ---------------------------------------------------------------- synth

void cmd_synth(const RunConfig& config) {
  const fs::path root(config.output_dir);
  ensure_dir(root);
  synth::SyntheticSpec spec = config.synth;
  spec.standardize_output = false;

  const Image tmpl = synth::make_template(spec.template_kind, spec.height, spec.width, spec.channels);
  write_png(root / "template.png", tmpl);
  gan::write_tensor_blob(root / "template.bin", image_tensor({tmpl}));

  json dataset = {{"format", kDatasetFormat},
                  {"template_kind", synth::to_string(spec.template_kind)},
                  {"height", spec.height},
                  {"width", spec.width},
                  {"channels", spec.channels},
                  {"set_size", spec.set_size},
                  {"template_file", "template.png"},
                  {"template_blob", "template.bin"},
                  {"sets", json::array()}};
  for (Index s = 0; s < config.n_sets; ++s) {
    const std::string id = fmt::format("set_{:04d}", s);
    spec.seed = set_seed(config.seed, s);
    const auto [set, truth] = synth::generate_set(spec);
    const fs::path dir = root / id;
    ensure_dir(dir);
    json manifest = {{"set_id", id},
                     {"seed", spec.seed},
                     {"model", to_string(truth.true_params.model)},
                     {"template_file", "../template.png"},
                     {"template_blob", "../template.bin"},
                     {"images_blob", "images.bin"}};
    for (Index j = 0; j < set.size(); ++j) {
      const std::string name = fmt::format("img_{:02d}.png", j);
      write_png(dir / name, set.images[j]);
      const VectorXd theta = truth.true_params.theta.row(j).transpose();
      manifest["images"].push_back(name);
      manifest["transforms"].push_back(std::vector<double>(theta.data(), theta.data() + theta.size()));
      manifest["gains"].push_back(truth.gains(j));
      manifest["occlusion_masks"].push_back(encode_rle(truth.occlusion_masks[j]));
      manifest["corruption_masks"].push_back(encode_rle(truth.corruption_masks[j]));
    }
    gan::write_tensor_blob(dir / "images.bin", image_tensor(set.images));
    write_text(dir / "manifest.json", manifest.dump() + "\n");
    dataset["sets"].push_back(id);
    spdlog::debug("wrote {}", id);
  }
  write_text(root / "dataset.json", dataset.dump(2) + "\n");
  spdlog::info("synth: {} sets of {} images in {}", config.n_sets, spec.set_size, root.string());
}

std::vector<DatasetEntry> load_dataset(const fs::path& dir, Index set_size, std::uint64_t seed) {
  std::vector<DatasetEntry> out;
  if (!fs::exists(dir / "dataset.json")) {
    const synth::IngestResult ingested = synth::ingest_directory(dir, set_size, seed);
    for (const auto& w : ingested.warnings) spdlog::warn("{}", w);
    std::map<std::string, int> counters;
    for (const auto& set : ingested.sets) {
      out.push_back({fmt::format("{}_{:03d}", set.subject_id, counters[set.subject_id]++), set, std::nullopt});
    }
    return out;
  }
  const json dataset = read_json(dir / "dataset.json");
  if (dataset.value("format", "") != kDatasetFormat) throw Error(ErrorKind::kDecodeError, "unknown dataset format");
  const Image tmpl = tensor_images(gan::read_tensor_blob<double>(dir / dataset.at("template_blob").get<std::string>()),
                                   dir / "template.bin")
                         .front();
  for (const auto& id_json : dataset.at("sets")) {
    const std::string id = id_json.get<std::string>();
    const fs::path set_dir = dir / id;
    const json manifest = read_json(set_dir / "manifest.json");
    DatasetEntry entry;
    entry.id = id;
    entry.set.subject_id = id;
    entry.set.images = tensor_images(gan::read_tensor_blob<double>(set_dir / manifest.at("images_blob").get<std::string>()),
                                     set_dir / "images.bin");
    if (entry.set.size() != set_size) {
      throw Error(ErrorKind::kSetSizeMismatch, id + " holds " + std::to_string(entry.set.size()) + " images, expected " +
                                                   std::to_string(set_size));
    }
    standardize_set(entry.set);

    synth::GroundTruth truth;
    truth.clean_template = tmpl;
    try {
      const TransformModel model = transform_model_from_string(manifest.at("model").get<std::string>());
      const auto transforms = manifest.at("transforms").get<std::vector<std::vector<double>>>();
      truth.true_params = TransformParams::zeros(model, static_cast<Index>(transforms.size()));
      for (std::size_t j = 0; j < transforms.size(); ++j) {
        for (std::size_t k = 0; k < transforms[j].size(); ++k) truth.true_params.theta(j, k) = transforms[j][k];
      }
      const auto gains = manifest.at("gains").get<std::vector<double>>();
      truth.gains = Eigen::Map<const VectorXd>(gains.data(), static_cast<Index>(gains.size()));
      const std::size_t plane = static_cast<std::size_t>(tmpl.plane());
      for (const auto& runs : manifest.at("occlusion_masks")) truth.occlusion_masks.push_back(decode_rle(runs, plane));
      for (const auto& runs : manifest.at("corruption_masks")) truth.corruption_masks.push_back(decode_rle(runs, plane));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kDecodeError, "malformed manifest for " + id + ": " + e.what());
    }
    entry.truth = std::move(truth);
    out.push_back(std::move(entry));
  }
  return out;
}

// ---------------------------------------------------------------- train

namespace {

template <typename Scalar>
void train_loop(const RunConfig& config, const std::optional<fs::path>& resume) {
  gan::GeneratorConfig gen = config.generator;
  gan::DiscriminatorConfig disc = config.discriminator;
  disc.channels = gen.channels;
  gan::TrainConfig train = config.train;
  train.seed = config.seed;
  if (resume) {
    const gan::CheckpointMeta meta = gan::read_checkpoint_meta(*resume);
    gen = meta.gen;
    disc = meta.disc;
    const auto max_steps = train.max_steps;
    const auto every = train.checkpoint_every;
    train = meta.train;
    train.max_steps = max_steps;
    train.checkpoint_every = every;
  }
  const gan::GanModel<Scalar> model(gen, disc, train);

  const auto entries = load_dataset(config.data_dir, gen.set_size, config.seed);
  if (entries.empty()) throw Error(ErrorKind::kEmptySubject, "no training sets found in " + config.data_dir);
  std::vector<gan::PreparedSet<Scalar>> sets;
  for (const auto& e : entries) sets.push_back(gan::prepare_set<Scalar>(e.set, gen.set_size));
  const auto pool = gan::RealPool<Scalar>::from_sets(sets, gen.channels);

  gan::TrainState<Scalar> state = resume ? gan::load_checkpoint(*resume, model) : model.init_state();
  const fs::path out(config.output_dir);
  ensure_dir(out / "checkpoints");
  const fs::path csv_path = out / "metrics.csv";
  const bool header = !resume || !fs::exists(csv_path);
  std::ofstream csv(csv_path, resume ? std::ios::app : std::ios::trunc);
  if (!csv) throw Error(ErrorKind::kIoError, "cannot write " + csv_path.string());
  if (header) csv << "step,loss_disc,loss_gen_adv,loss_sparse,grad_norm_G,grad_norm_D\n";

  spdlog::info("train: {} sets, {}-bit, steps {} -> {}", sets.size(), sizeof(Scalar) * 8, state.step, train.max_steps);
  std::int64_t last_saved = -1;
  while (state.step < train.max_steps) {
    std::vector<const gan::PreparedSet<Scalar>*> batch;
    for (Index i : model.sample_batch(state, static_cast<Index>(sets.size()))) batch.push_back(&sets[i]);
    const gan::StepMetrics m = model.train_step(state, batch, pool);
    csv << fmt::format("{},{},{},{},{},{}\n", m.step, m.loss_disc, m.loss_gen_adv, m.loss_sparse, m.grad_norm_gen,
                       m.grad_norm_disc);
    csv.flush();
    spdlog::debug("step {} loss_disc={} loss_gen_adv={} loss_sparse={}", m.step, m.loss_disc, m.loss_gen_adv,
                  m.loss_sparse);
    if (state.step % train.checkpoint_every == 0) {
      gan::save_checkpoint(out / "checkpoints" / format_step_dir(state.step), state, model);
      last_saved = state.step;
    }
  }
  if (last_saved != state.step) gan::save_checkpoint(out / "checkpoints" / format_step_dir(state.step), state, model);
  spdlog::info("train: finished at step {}", state.step);
}

}  // namespace

void cmd_train(const RunConfig& config, const std::optional<fs::path>& resume) {
  if (config.data_dir.empty()) throw Error(ErrorKind::kConfigError, "train needs data_dir");
  int precision = config.precision_or(32);
  if (resume) {
    const int stored = gan::read_checkpoint_meta(*resume).precision;
    if (config.precision && *config.precision != stored) {
      spdlog::warn("checkpoint is {}-bit; continuing in {}-bit", stored, stored);
    }
    precision = stored;
  }
  if (precision == 64) {
    train_loop<double>(config, resume);
  } else {
    train_loop<float>(config, resume);
  }
}

// ---------------------------------------------------------------- align

namespace {

struct Aligned {
  Image image;
  eval::EvalReport report;
};

void fill_spectrum(eval::EvalReport& r, const MatrixXd& a, const MatrixXd& e, const EvalSettings& s) {
  r.singular_values = eval::singular_spectrum(a);
  r.effective_rank = eval::effective_rank(a, s.rank_rel_tol);
  r.residual_sparsity = eval::residual_sparsity(e, s.sparsity_abs_tol);
}

Aligned align_rasl(const DatasetEntry& entry, const RunConfig& config) {
  const rasl::RaslResult result = rasl::rasl_align(entry.set, config.rasl);
  Aligned out;
  out.image = rasl::rasl_output_image(result);
  out.report.set_id = entry.id;
  out.report.method = eval::Method::kRasl;
  fill_spectrum(out.report, result.A.data, result.E.data, config.eval);
  if (entry.truth) {
    out.report.template_rmse = eval::template_rmse(out.image, entry.truth->clean_template);
    const TransformParams truth = inverse_params(entry.truth->true_params);
    if (truth.model == result.tau.model) {
      out.report.shift_error_px = eval::shift_error(result.tau, truth);
    } else {
      spdlog::debug("{}: no shift error across {} and {} models", entry.id, to_string(truth.model),
                    to_string(result.tau.model));
    }
  }
  if (!result.converged) spdlog::warn("{}: RASL stopped at max_outer", entry.id);
  return out;
}

template <typename Scalar>
std::vector<Aligned> align_all_gan(const std::vector<DatasetEntry>& entries, const RunConfig& config,
                                   const fs::path& checkpoint) {
  const gan::CheckpointMeta meta = gan::read_checkpoint_meta(checkpoint);
  const gan::Generator<Scalar> generator(meta.gen);
  const gan::ParameterSet<Scalar> params = gan::load_generator_params(checkpoint, generator);
  std::vector<Aligned> out;
  for (const auto& entry : entries) {
    Aligned a;
    a.image = gan::align_gan(generator, params, entry.set);
    a.report.set_id = entry.id;
    a.report.method = eval::Method::kGan;
    // The generator emits one image; its stack is that image in every column.
    const MatrixXd d = flatten_stack(entry.set).data;
    MatrixXd broadcast(d.rows(), d.cols());
    for (Index j = 0; j < d.cols(); ++j) broadcast.col(j) = a.image.pixels;
    const VectorXd norms = d.colwise().norm().transpose();
    MatrixXd residual = d - broadcast;
    for (Index j = 0; j < d.cols(); ++j) {
      if (norms(j) > 0) {
        broadcast.col(j) /= norms(j);
        residual.col(j) /= norms(j);
      }
    }
    fill_spectrum(a.report, broadcast, residual, config.eval);
    if (entry.truth) a.report.template_rmse = eval::template_rmse(a.image, entry.truth->clean_template);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

void cmd_align(const RunConfig& config, eval::Method method, const std::optional<fs::path>& checkpoint) {
  if (config.data_dir.empty()) throw Error(ErrorKind::kConfigError, "align needs data_dir");
  std::vector<Aligned> results;
  if (method == eval::Method::kGan) {
    if (!checkpoint) throw Error(ErrorKind::kCheckpointMissing, "align --method gan needs --checkpoint");
    const gan::CheckpointMeta meta = gan::read_checkpoint_meta(*checkpoint);
    const auto entries = load_dataset(config.data_dir, meta.gen.set_size, config.seed);
    if (config.precision_or(64) == 64) {
      results = align_all_gan<double>(entries, config, *checkpoint);
    } else {
      results = align_all_gan<float>(entries, config, *checkpoint);
    }
  } else if (method == eval::Method::kRasl) {
    const auto entries = load_dataset(config.data_dir, config.generator.set_size, config.seed);
    for (const auto& entry : entries) {
      results.push_back(align_rasl(entry, config));
      spdlog::info("{}: rank {} sparsity {:.4f}", entry.id, results.back().report.effective_rank,
                   results.back().report.residual_sparsity);
    }
  } else {
    throw Error(ErrorKind::kConfigError, "align supports --method rasl or gan");
  }

  const fs::path out(config.output_dir);
  ensure_dir(out / "aligned");
  std::string lines;
  for (const auto& r : results) {
    write_png(out / "aligned" / (r.report.set_id + ".png"), display_image(r.image));
    gan::write_tensor_blob(out / "aligned" / (r.report.set_id + ".bin"), image_tensor({r.image}));
    lines += r.report.to_json_line() + "\n";
  }
  write_text(out / "reports.jsonl", lines);
  spdlog::info("align: {} sets with {}", results.size(), eval::to_string(method));
}

// ---------------------------------------------------------------- eval

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<fs::path> report_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& input : inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      files.push_back(p / "reports.jsonl");
    } else {
      files.push_back(p);
    }
  }
  return files;
}

}  // namespace

std::string cmd_eval(const RunConfig& config) {
  if (config.eval.reports.empty()) throw Error(ErrorKind::kConfigError, "eval needs eval.reports");
  std::map<std::string, std::vector<eval::EvalReport>> by_method;
  for (const fs::path& file : report_files(config.eval.reports)) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::kIoError, "cannot read " + file.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const eval::EvalReport r = eval::EvalReport::from_json_line(line);
      by_method[eval::to_string(r.method)].push_back(r);
    }
  }

  const std::vector<std::string> metrics{"effective_rank", "residual_sparsity", "template_rmse", "shift_error_px"};
  std::ostringstream csv;
  csv << "method,n_reports";
  for (const auto& m : metrics) csv << "," << m << "_median," << m << "_mean";
  csv << "\n";
  std::ostringstream table;
  table << fmt::format("{:<8}{:>6}", "method", "n");
  for (const auto& m : metrics) table << fmt::format("  {:>24}", m + " med/mean");
  table << "\n";

  for (const auto& [method, reports] : by_method) {
    csv << method << "," << reports.size();
    table << fmt::format("{:<8}{:>6}", method, reports.size());
    for (const auto& m : metrics) {
      std::vector<double> values;
      for (const auto& r : reports) {
        if (m == "effective_rank") values.push_back(static_cast<double>(r.effective_rank));
        if (m == "residual_sparsity") values.push_back(r.residual_sparsity);
        if (m == "template_rmse" && r.template_rmse) values.push_back(*r.template_rmse);
        if (m == "shift_error_px" && r.shift_error_px) values.push_back(*r.shift_error_px);
      }
      if (values.empty()) {
        csv << ",,";
        table << fmt::format("  {:>24}", "-");
      } else {
        csv << fmt::format(",{},{}", median(values), mean(values));
        table << fmt::format("  {:>24}", fmt::format("{:.4g}/{:.4g}", median(values), mean(values)));
      }
    }
    csv << "\n";
    table << "\n";
  }
  const fs::path out(config.output_dir);
  ensure_dir(out);
  write_text(out / "summary.csv", csv.str());
  write_text(out / "summary.txt", table.str());
  return table.str();
}

// ---------------------------------------------------------------- gradcheck

bool cmd_gradcheck(const RunConfig& config) {
  if (config.precision_or(64) != 64) throw Error(ErrorKind::kConfigError, "gradcheck runs in 64-bit only");
  gan::GradCheckConfig gc = config.gradcheck;
  gc.seed = config.seed;
  gc.disc.channels = gc.gen.channels;
  const gan::GradCheckReport report = gan::grad_check(gc);
  const fs::path out(config.output_dir);
  ensure_dir(out);
  write_text(out / "gradcheck.json", report.to_json() + "\n");
  for (const char* objective : {"loss_sparse", "loss_gan_ls_gen", "loss_full", "loss_gan_ls_disc"}) {
    spdlog::info("gradcheck {}: max relative error {:.3e}", objective, report.max_rel_error_for(objective));
  }
  spdlog::info("gradcheck: {}", report.passed ? "pass" : "FAIL");
  return report.passed;
}

// ---------------------------------------------------------------- entry point

int run(int argc, char** argv) {
  CLI::App app{"Batch image alignment: RASL baseline and low-rank GAN"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> checkpoint;
  std::string method = "rasl";
  std::optional<int> precision;
  app.add_option("command", command, "synth | train | align | eval | gradcheck")
      ->required()
      ->check(CLI::IsMember({"synth", "train", "align", "eval", "gradcheck"}));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--out", out_dir, "Override the output directory");
  app.add_option("--checkpoint", checkpoint, "Checkpoint directory to resume from (train) or align with (gan)");
  app.add_option("--method", method, "Alignment method")->check(CLI::IsMember({"rasl", "gan"}));
  app.add_option("--precision", precision, "Floating-point width")->check(CLI::IsMember({32, 64}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto logger = spdlog::stderr_color_mt("lowrank-align");
  spdlog::set_default_logger(logger);
  try {
    RunConfig config = load_config(config_path);
    if (seed) config.seed = *seed;
    if (out_dir) config.output_dir = *out_dir;
    if (precision) config.precision = *precision;
    if (const char* env = std::getenv("LOWRANK_ALIGN_LOG")) config.log_level = env;
    config.validate();
    spdlog::set_level(spdlog::level::from_str(config.log_level));
    write_resolved_config(config, command);

    std::optional<fs::path> ckpt;
    if (checkpoint) ckpt = fs::path(*checkpoint);
    if (command == "synth") {
      cmd_synth(config);
    } else if (command == "train") {
      cmd_train(config, ckpt);
    } else if (command == "align") {
      cmd_align(config, eval::method_from_string(method), ckpt);
    } else if (command == "eval") {
      std::fputs(cmd_eval(config).c_str(), stdout);
    } else if (!cmd_gradcheck(config)) {
      return 4;
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 4;
  }
  return 0;
}

}  // namespace lowrank_align::cli
