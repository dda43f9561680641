#include "lowrank_align/gan/checkpoint.hpp"

#include "lowrank_align/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace lowrank_align::gan {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'L', 'R', 'A', 'T'};
constexpr const char* kFormat = "lowrank-align-checkpoint-1";

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw Error(ErrorKind::kIoError, "truncated tensor blob");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string join(const std::vector<Index>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  return out.str();
}

std::vector<Index> split_indices(const std::string& text) {
  std::vector<Index> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stoll(item));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

template <typename Scalar>
void write_group(const fs::path& dir, const ParameterSet<Scalar>& params) {
  fs::create_directories(dir);
  for (Index i = 0; i < params.size(); ++i) write_tensor_blob(dir / (params.name(i) + ".bin"), params[i]);
}

template <typename Scalar>
ParameterSet<Scalar> read_group(const fs::path& dir, const ParameterSet<Scalar>& layout) {
  ParameterSet<Scalar> params = layout.zeros_like();
  for (Index i = 0; i < params.size(); ++i) {
    Tensor<Scalar> tensor = read_tensor_blob<Scalar>(dir / (params.name(i) + ".bin"));
    if (tensor.shape != params[i].shape) {
      throw Error(ErrorKind::kIoError, "tensor " + params.name(i) + " in " + dir.string() + " has the wrong shape");
    }
    params[i] = std::move(tensor);
  }
  return params;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream in(text);
  std::string line;
  auto trim = [](const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::kIoError, "malformed manifest line '" + line + "'");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

template <typename Scalar>
void write_tensor_blob(const fs::path& path, const Tensor<Scalar>& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, sizeof(Scalar) * 8);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.shape.size()));
  for (Index d : tensor.shape) write_le<std::uint64_t>(out, static_cast<std::uint64_t>(d));
  for (Index i = 0; i < tensor.values.size(); ++i) write_le<Scalar>(out, tensor.values(i));
  if (!out) throw Error(ErrorKind::kIoError, "failed writing " + path.string());
}

template <typename Scalar>
Tensor<Scalar> read_tensor_blob(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot read " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorKind::kIoError, path.string() + " is not a tensor blob");
  const auto bits = read_le<std::uint32_t>(in);
  const auto ndim = read_le<std::uint32_t>(in);
  Tensor<Scalar> tensor;
  for (std::uint32_t d = 0; d < ndim; ++d) tensor.shape.push_back(static_cast<Index>(read_le<std::uint64_t>(in)));
  tensor.values.resize(tensor.size());
  for (Index i = 0; i < tensor.values.size(); ++i) {
    if (bits == 32) {
      tensor.values(i) = static_cast<Scalar>(read_le<float>(in));
    } else if (bits == 64) {
      tensor.values(i) = static_cast<Scalar>(read_le<double>(in));
    } else {
      throw Error(ErrorKind::kIoError, path.string() + ": unsupported precision " + std::to_string(bits));
    }
  }
  return tensor;
}

template <typename Scalar>
void save_checkpoint(const fs::path& dir, const TrainState<Scalar>& state, const GanModel<Scalar>& model) {
  fs::create_directories(dir);
  const GeneratorConfig& g = model.generator().config();
  const DiscriminatorConfig& d = model.discriminator().config();
  const TrainConfig& t = model.train_config();
  std::ostringstream manifest;
  manifest << "format=" << kFormat << "\n"
           << "precision=" << sizeof(Scalar) * 8 << "\n"
           << "step=" << state.step << "\n"
           << "seed=" << state.seed << "\n"
           << "gen.height=" << g.height << "\n"
           << "gen.width=" << g.width << "\n"
           << "gen.channels=" << g.channels << "\n"
           << "gen.set_size=" << g.set_size << "\n"
           << "gen.base_width=" << g.base_width << "\n"
           << "gen.n_res_blocks=" << g.n_res_blocks << "\n"
           << "disc.widths=" << join(d.widths) << "\n"
           << "disc.strides=" << join(d.strides) << "\n"
           << "disc.kernel=" << d.kernel << "\n"
           << "disc.pad=" << d.pad << "\n"
           << "disc.channels=" << d.channels << "\n"
           << "train.gamma_sparse=" << format_double(t.gamma_sparse) << "\n"
           << "train.learning_rate=" << format_double(t.learning_rate) << "\n"
           << "train.batch_size=" << t.batch_size << "\n"
           << "train.adam_beta1=" << format_double(t.adam_beta1) << "\n"
           << "train.adam_beta2=" << format_double(t.adam_beta2) << "\n"
           << "train.adam_eps=" << format_double(t.adam_eps) << "\n";
  write_text(dir / "manifest.txt", manifest.str());
  std::ostringstream rng;
  rng << state.rng;
  write_text(dir / "rng_state.txt", rng.str() + "\n");
  write_group(dir / "gen", state.gen_params);
  write_group(dir / "gen_adam_m", state.gen_moments.first);
  write_group(dir / "gen_adam_v", state.gen_moments.second);
  write_group(dir / "disc", state.disc_params);
  write_group(dir / "disc_adam_m", state.disc_moments.first);
  write_group(dir / "disc_adam_v", state.disc_moments.second);
}

CheckpointMeta read_checkpoint_meta(const fs::path& dir) {
  const fs::path path = dir / "manifest.txt";
  if (!fs::exists(path)) throw Error(ErrorKind::kCheckpointMissing, "no checkpoint manifest at " + path.string());
  const auto kv = parse_key_values(read_text(path));
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::kIoError, "checkpoint manifest lacks '" + key + "'");
    return it->second;
  };
  if (get("format") != kFormat) throw Error(ErrorKind::kIoError, "unsupported checkpoint format " + get("format"));
  CheckpointMeta meta;
  try {
    meta.precision = std::stoi(get("precision"));
    meta.step = std::stoll(get("step"));
    meta.seed = std::stoull(get("seed"));
    meta.gen.height = std::stoll(get("gen.height"));
    meta.gen.width = std::stoll(get("gen.width"));
    meta.gen.channels = std::stoll(get("gen.channels"));
    meta.gen.set_size = std::stoll(get("gen.set_size"));
    meta.gen.base_width = std::stoll(get("gen.base_width"));
    meta.gen.n_res_blocks = std::stoll(get("gen.n_res_blocks"));
    meta.disc.widths = split_indices(get("disc.widths"));
    meta.disc.strides = split_indices(get("disc.strides"));
    meta.disc.kernel = std::stoll(get("disc.kernel"));
    meta.disc.pad = std::stoll(get("disc.pad"));
    meta.disc.channels = std::stoll(get("disc.channels"));
    meta.train.gamma_sparse = std::stod(get("train.gamma_sparse"));
    meta.train.learning_rate = std::stod(get("train.learning_rate"));
    meta.train.batch_size = std::stoll(get("train.batch_size"));
    meta.train.adam_beta1 = std::stod(get("train.adam_beta1"));
    meta.train.adam_beta2 = std::stod(get("train.adam_beta2"));
    meta.train.adam_eps = std::stod(get("train.adam_eps"));
    meta.train.seed = meta.seed;
  } catch (const std::logic_error& e) {
    throw Error(ErrorKind::kIoError, std::string("malformed checkpoint manifest: ") + e.what());
  }
  return meta;
}

template <typename Scalar>
TrainState<Scalar> load_checkpoint(const fs::path& dir, const GanModel<Scalar>& model) {
  const CheckpointMeta meta = read_checkpoint_meta(dir);
  TrainState<Scalar> state;
  state.step = meta.step;
  state.seed = meta.seed;
  std::istringstream rng(read_text(dir / "rng_state.txt"));
  rng >> state.rng;
  if (!rng) throw Error(ErrorKind::kIoError, "malformed rng state in " + dir.string());
  const auto& gen_layout = model.generator().layout();
  const auto& disc_layout = model.discriminator().layout();
  state.gen_params = read_group(dir / "gen", gen_layout);
  state.gen_moments = {read_group(dir / "gen_adam_m", gen_layout), read_group(dir / "gen_adam_v", gen_layout)};
  state.disc_params = read_group(dir / "disc", disc_layout);
  state.disc_moments = {read_group(dir / "disc_adam_m", disc_layout), read_group(dir / "disc_adam_v", disc_layout)};
  return state;
}

template <typename Scalar>
ParameterSet<Scalar> load_generator_params(const fs::path& dir, const Generator<Scalar>& generator) {
  read_checkpoint_meta(dir);
  return read_group(dir / "gen", generator.layout());
}

#define LOWRANK_ALIGN_INSTANTIATE(T)                                                                  \
  template void write_tensor_blob<T>(const fs::path&, const Tensor<T>&);                              \
  template Tensor<T> read_tensor_blob<T>(const fs::path&);                                            \
  template void save_checkpoint<T>(const fs::path&, const TrainState<T>&, const GanModel<T>&);        \
  template TrainState<T> load_checkpoint<T>(const fs::path&, const GanModel<T>&);                     \
  template ParameterSet<T> load_generator_params<T>(const fs::path&, const Generator<T>&);

LOWRANK_ALIGN_INSTANTIATE(float)
LOWRANK_ALIGN_INSTANTIATE(double)

#undef LOWRANK_ALIGN_INSTANTIATE

}  // namespace lowrank_align::gan
