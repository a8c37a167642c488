#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "panodet/geometry.hpp"

namespace panodet {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ImageDims {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

/// Row-major 8-bit raster with 1 or 3 interleaved channels.
///
/// The backing buffer carries a few zero bytes past the last sample so that
/// vector kernels may issue 32-bit loads at any sample offset.
class Raster {
 public:
  static constexpr std::size_t kTailPadding = 4;

  Raster() = default;
  Raster(int width, int height, int channels);
  Raster(int width, int height, int channels, std::span<const std::uint8_t> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return buf_.size() - kTailPadding; }
  std::size_t stride() const noexcept { return static_cast<std::size_t>(width_) * channels_; }

  std::span<const std::uint8_t> samples() const noexcept { return {buf_.data(), size()}; }
  std::span<std::uint8_t> samples() noexcept { return {buf_.data(), size()}; }
  /// Samples plus the zero tail padding.
  std::span<const std::uint8_t> padded() const noexcept { return buf_; }

  std::uint8_t at(int x, int y, int c = 0) const noexcept {
    return buf_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) noexcept {
    return buf_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  friend bool operator==(const Raster& a, const Raster& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.channels_ == b.channels_ &&
           a.buf_ == b.buf_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<std::uint8_t> buf_ = std::vector<std::uint8_t>(kTailPadding, 0);
};

/// Equirectangular frame: width = 2 * height. Column 0 is lon = -pi, row 0 is
/// lat = +pi/2; lon grows rightward, lat shrinks downward.
class EraImage {
 public:
  EraImage() = default;
  explicit EraImage(Raster raster);

  const Raster& raster() const noexcept { return raster_; }
  ImageDims dims() const noexcept { return {raster_.width(), raster_.height()}; }

 private:
  Raster raster_;
};

struct WindowImage {
  WindowSpec spec;
  Raster raster;
};

void validate_era_dims(ImageDims dims);

SphereCoord era_pixel_to_sphere(ImageDims dims, PixelCoord px);
PixelCoord sphere_to_era_pixel(ImageDims dims, SphereCoord s);

// PNG (8-bit gray or RGB) and the raw fixture format:
// "ERAI", u32 width, u32 height, u8 channels (little endian), then samples.
std::vector<std::uint8_t> encode_png(const Raster& r);
Raster decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_raw(const Raster& r);
Raster decode_raw(std::span<const std::uint8_t> bytes);

/// Width and height from the file header without decoding samples.
ImageDims read_image_dims(const std::filesystem::path& path);

/// Loads PNG or raw by content sniffing.
Raster read_image(const std::filesystem::path& path);
/// Writes raw when the extension is ".raw" or ".erai", PNG otherwise.
void write_image(const std::filesystem::path& path, const Raster& r);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace panodet
