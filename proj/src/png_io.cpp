#include "lowrank_align/png_io.hpp"

#include "lowrank_align/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace lowrank_align {

namespace {

struct PngImageGuard {
  png_image image{};
  PngImageGuard() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImageGuard() { png_image_free(&image); }
  PngImageGuard(const PngImageGuard&) = delete;
  PngImageGuard& operator=(const PngImageGuard&) = delete;
};

}  // namespace

Image read_png(const std::filesystem::path& path) {
  PngImageGuard guard;
  png_image& png = guard.image;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw Error(ErrorKind::kDecodeError, path.string() + ": " + png.message);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const Index channels = color ? 3 : 1;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    throw Error(ErrorKind::kDecodeError, path.string() + ": " + png.message);
  }
  Image image(static_cast<Index>(png.height), static_cast<Index>(png.width), channels);
  for (Index y = 0; y < image.height; ++y) {
    for (Index x = 0; x < image.width; ++x) {
      for (Index ch = 0; ch < channels; ++ch) {
        image.at(y, x, ch) = buffer[(y * image.width + x) * channels + ch] / 255.0;
      }
    }
  }
  return image;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(ErrorKind::kIoError, "PNG output supports 1 or 3 channels, got " + std::to_string(image.channels));
  }
  PngImageGuard guard;
  png_image& png = guard.image;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  for (Index y = 0; y < image.height; ++y) {
    for (Index x = 0; x < image.width; ++x) {
      for (Index ch = 0; ch < image.channels; ++ch) {
        const double v = std::clamp(image.at(y, x, ch), 0.0, 1.0);
        buffer[(y * image.width + x) * image.channels + ch] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
    throw Error(ErrorKind::kIoError, path.string() + ": " + png.message);
  }
}

}  // namespace lowrank_align
