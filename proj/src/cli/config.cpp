#include "lowrank_align/cli/config.hpp"

#include "lowrank_align/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace lowrank_align::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::kConfigError, what); }

// Reads optional fields of one JSON object and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(where() + " must be a JSON object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      config_error(path_ + "." + key + ": " + e.what());
    }
  }

  template <typename T>
  void get(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    T value{};
    get(key, value);
    out = value;
  }

  template <typename F>
  void child(const std::string& key, F&& fill) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader r(j_.at(key), path_ + "." + key);
    fill(r);
    r.finish();
  }

  void ignore(const std::string& key) { seen_.insert(key); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) config_error("unknown key " + path_ + "." + item.key());
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json generator_json(const gan::GeneratorConfig& g) {
  return {{"height", g.height},       {"width", g.width},           {"channels", g.channels},
          {"set_size", g.set_size},   {"base_width", g.base_width}, {"n_res_blocks", g.n_res_blocks}};
}

void read_generator(Reader& r, gan::GeneratorConfig& g) {
  r.get("height", g.height);
  r.get("width", g.width);
  r.get("channels", g.channels);
  r.get("set_size", g.set_size);
  r.get("base_width", g.base_width);
  r.get("n_res_blocks", g.n_res_blocks);
}

json discriminator_json(const gan::DiscriminatorConfig& d) {
  return {{"widths", d.widths}, {"strides", d.strides}, {"kernel", d.kernel}, {"pad", d.pad}};
}

void read_discriminator(Reader& r, gan::DiscriminatorConfig& d) {
  r.get("widths", d.widths);
  r.get("strides", d.strides);
  r.get("kernel", d.kernel);
  r.get("pad", d.pad);
}

}  // namespace

json RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["precision"] = precision ? json(*precision) : json(nullptr);
  j["log_level"] = log_level;
  j["data_dir"] = data_dir;
  j["synth"] = {{"template_kind", synth::to_string(synth.template_kind)},
                {"height", synth.height},
                {"width", synth.width},
                {"channels", synth.channels},
                {"set_size", synth.set_size},
                {"n_sets", n_sets},
                {"max_shift", synth.max_shift},
                {"integer_shifts", synth.integer_shifts},
                {"max_rotation", synth.max_rotation},
                {"illum_gain_lo", synth.illum_gain_lo},
                {"illum_gain_hi", synth.illum_gain_hi},
                {"occlusion_prob", synth.occlusion_prob},
                {"occlusion_frac", synth.occlusion_frac},
                {"corruption_density", synth.corruption_density}};
  j["rasl"] = {{"lambda", rasl.lambda ? json(*rasl.lambda) : json(nullptr)},
               {"max_outer", rasl.max_outer},
               {"max_inner", rasl.max_inner},
               {"tol_outer", rasl.tol_outer},
               {"tol_inner", rasl.tol_inner},
               {"mu_init", rasl.mu_init ? json(*rasl.mu_init) : json(nullptr)},
               {"rho", rasl.rho},
               {"max_halvings", rasl.max_halvings},
               {"model", to_string(rasl.model)}};
  j["generator"] = generator_json(generator);
  j["discriminator"] = discriminator_json(discriminator);
  j["train"] = {{"gamma_sparse", train.gamma_sparse}, {"learning_rate", train.learning_rate},
                {"batch_size", train.batch_size},     {"adam_beta1", train.adam_beta1},
                {"adam_beta2", train.adam_beta2},     {"adam_eps", train.adam_eps},
                {"max_steps", train.max_steps},       {"checkpoint_every", train.checkpoint_every}};
  j["eval"] = {{"rank_rel_tol", eval.rank_rel_tol},
               {"sparsity_abs_tol", eval.sparsity_abs_tol},
               {"reports", eval.reports}};
  j["gradcheck"] = {{"generator", generator_json(gradcheck.gen)},
                    {"discriminator", discriminator_json(gradcheck.disc)},
                    {"gamma", gradcheck.gamma},
                    {"batch_size", gradcheck.batch_size},
                    {"coords_per_tensor", gradcheck.coords_per_tensor},
                    {"step", gradcheck.step},
                    {"tolerance", gradcheck.tolerance},
                    {"magnitude_floor", gradcheck.magnitude_floor}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  Reader r(j, "config");
  r.ignore("command");
  r.get("seed", c.seed);
  r.get("output_dir", c.output_dir);
  r.get("precision", c.precision);
  r.get("log_level", c.log_level);
  r.get("data_dir", c.data_dir);
  r.child("synth", [&](Reader& s) {
    std::string kind = synth::to_string(c.synth.template_kind);
    s.get("template_kind", kind);
    try {
      c.synth.template_kind = synth::template_kind_from_string(kind);
    } catch (const Error& e) {
      config_error(std::string("config.synth.template_kind: ") + e.what());
    }
    s.get("height", c.synth.height);
    s.get("width", c.synth.width);
    s.get("channels", c.synth.channels);
    s.get("set_size", c.synth.set_size);
    s.get("n_sets", c.n_sets);
    s.get("max_shift", c.synth.max_shift);
    s.get("integer_shifts", c.synth.integer_shifts);
    s.get("max_rotation", c.synth.max_rotation);
    s.get("illum_gain_lo", c.synth.illum_gain_lo);
    s.get("illum_gain_hi", c.synth.illum_gain_hi);
    s.get("occlusion_prob", c.synth.occlusion_prob);
    s.get("occlusion_frac", c.synth.occlusion_frac);
    s.get("corruption_density", c.synth.corruption_density);
  });
  r.child("rasl", [&](Reader& s) {
    s.get("lambda", c.rasl.lambda);
    s.get("max_outer", c.rasl.max_outer);
    s.get("max_inner", c.rasl.max_inner);
    s.get("tol_outer", c.rasl.tol_outer);
    s.get("tol_inner", c.rasl.tol_inner);
    s.get("mu_init", c.rasl.mu_init);
    s.get("rho", c.rasl.rho);
    s.get("max_halvings", c.rasl.max_halvings);
    std::string model = to_string(c.rasl.model);
    s.get("model", model);
    try {
      c.rasl.model = transform_model_from_string(model);
    } catch (const Error& e) {
      config_error(std::string("config.rasl.model: ") + e.what());
    }
  });
  r.child("generator", [&](Reader& s) { read_generator(s, c.generator); });
  r.child("discriminator", [&](Reader& s) { read_discriminator(s, c.discriminator); });
  r.child("train", [&](Reader& s) {
    s.get("gamma_sparse", c.train.gamma_sparse);
    s.get("learning_rate", c.train.learning_rate);
    s.get("batch_size", c.train.batch_size);
    s.get("adam_beta1", c.train.adam_beta1);
    s.get("adam_beta2", c.train.adam_beta2);
    s.get("adam_eps", c.train.adam_eps);
    s.get("max_steps", c.train.max_steps);
    s.get("checkpoint_every", c.train.checkpoint_every);
  });
  r.child("eval", [&](Reader& s) {
    s.get("rank_rel_tol", c.eval.rank_rel_tol);
    s.get("sparsity_abs_tol", c.eval.sparsity_abs_tol);
    s.get("reports", c.eval.reports);
  });
  r.child("gradcheck", [&](Reader& s) {
    s.child("generator", [&](Reader& g) { read_generator(g, c.gradcheck.gen); });
    s.child("discriminator", [&](Reader& d) { read_discriminator(d, c.gradcheck.disc); });
    s.get("gamma", c.gradcheck.gamma);
    s.get("batch_size", c.gradcheck.batch_size);
    s.get("coords_per_tensor", c.gradcheck.coords_per_tensor);
    s.get("step", c.gradcheck.step);
    s.get("tolerance", c.gradcheck.tolerance);
    s.get("magnitude_floor", c.gradcheck.magnitude_floor);
  });
  r.finish();
  return c;
}

void RunConfig::validate() const {
  if (precision && *precision != 32 && *precision != 64) config_error("precision must be 32 or 64");
  if (n_sets < 1) config_error("synth.n_sets must be positive");
  if (!(eval.rank_rel_tol > 0) || !(eval.sparsity_abs_tol > 0)) config_error("eval tolerances must be positive");
  static const std::set<std::string> levels{"trace", "debug", "info", "warn", "error", "critical", "off"};
  if (!levels.count(log_level)) config_error("unknown log_level '" + log_level + "'");
  try {
    synth.validate();
    rasl.validate();
    generator.validate();
    discriminator.validate();
    train.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    config_error("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return RunConfig::from_json(j);
}

void write_resolved_config(const RunConfig& config, const std::string& command) {
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  json j = config.to_json();
  j["command"] = command;
  std::ofstream out(dir / "config.resolved.json");
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + (dir / "config.resolved.json").string());
}

}  // namespace lowrank_align::cli
