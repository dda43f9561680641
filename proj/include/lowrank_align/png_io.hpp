#pragma once

#include "lowrank_align/core.hpp"

#include <filesystem>

namespace lowrank_align {

/// Decodes an 8- or 16-bit gray/RGB PNG (alpha dropped) into [0, 1] values.
/// Throws kDecodeError on malformed files.
Image read_png(const std::filesystem::path& path);

/// Writes an 8-bit gray (1 channel) or RGB (3 channel) PNG; values are clamped
/// to [0, 1] and rounded. Throws kIoError.
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace lowrank_align
