#pragma once

#include "lowrank_align/cli/config.hpp"
#include "lowrank_align/error.hpp"
#include "lowrank_align/eval.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lowrank_align::cli {

/// Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
int exit_code(ErrorKind kind);

/// Row-major runs of set pixels as [start, length] pairs.
nlohmann::json encode_rle(const synth::Mask& mask);
synth::Mask decode_rle(const nlohmann::json& runs, std::size_t size);

struct DatasetEntry {
  std::string id;
  ImageSet set;  // standardized
  std::optional<synth::GroundTruth> truth;
};

/// Reads a directory written by cmd_synth (exact float64 blobs plus ground
/// truth) or, failing that, a `<root>/<subject>/*.png` tree via ingestion.
std::vector<DatasetEntry> load_dataset(const std::filesystem::path& dir, Index set_size, std::uint64_t seed);

/// Writes template.{png,bin}, dataset.json and one directory per set holding
/// the PNGs, an exact images.bin and manifest.json.
void cmd_synth(const RunConfig& config);

/// Trains until config.train.max_steps, appending to metrics.csv and writing
/// checkpoints/step_NNNNNN every checkpoint_every steps and at the end.
void cmd_train(const RunConfig& config, const std::optional<std::filesystem::path>& resume);

/// Writes aligned/<id>.png, aligned/<id>.bin and reports.jsonl.
void cmd_align(const RunConfig& config, eval::Method method, const std::optional<std::filesystem::path>& checkpoint);

/// Per-method medians and means of every report metric, as summary.csv and
/// summary.txt. Returns the table text.
std::string cmd_eval(const RunConfig& config);

/// Writes gradcheck.json; returns whether every tensor passed.
bool cmd_gradcheck(const RunConfig& config);

/// Parses argv, runs one command and maps failures to exit codes.
int run(int argc, char** argv);

}  // namespace lowrank_align::cli
