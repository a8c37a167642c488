#include "panodet/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

namespace panodet {

namespace {

constexpr std::uint8_t kRawMagic[4] = {'E', 'R', 'A', 'I'};
constexpr std::size_t kRawHeader = 13;

void check_shape(int width, int height, int channels) {
  if (width <= 0 || height <= 0) throw ImageError("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw ImageError("images must have 1 or 3 channels");
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

struct PngImageGuard {
  png_image* img;
  ~PngImageGuard() { png_image_free(img); }
};

}  // namespace

Raster::Raster(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  buf_.assign(static_cast<std::size_t>(width) * height * channels + kTailPadding, 0);
}

Raster::Raster(int width, int height, int channels, std::span<const std::uint8_t> samples)
    : Raster(width, height, channels) {
  if (samples.size() != size()) {
    throw ImageError("sample count " + std::to_string(samples.size()) +
                     " does not match raster shape");
  }
  std::copy(samples.begin(), samples.end(), buf_.begin());
}

void validate_era_dims(ImageDims dims) {
  if (dims.width <= 0 || dims.height <= 0 || dims.width != 2 * dims.height) {
    throw ImageError("equirectangular frames must be 2:1, got " + std::to_string(dims.width) +
                     "x" + std::to_string(dims.height));
  }
}

EraImage::EraImage(Raster raster) : raster_(std::move(raster)) {
  validate_era_dims(dims());
}

SphereCoord era_pixel_to_sphere(ImageDims dims, PixelCoord px) {
  const double lon = px.x / dims.width * kTwoPi - kPi;
  const double lat = kHalfPi - px.y / dims.height * kPi;
  return canonical(lat, lon);
}

PixelCoord sphere_to_era_pixel(ImageDims dims, SphereCoord s) {
  return {(s.lon + kPi) / kTwoPi * dims.width, (kHalfPi - s.lat) / kPi * dims.height};
}

std::vector<std::uint8_t> encode_png(const Raster& r) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(r.width());
  img.height = static_cast<png_uint_32>(r.height());
  img.format = r.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  PngImageGuard guard{&img};

  png_alloc_size_t size = 0;
  const auto stride = static_cast<png_int_32>(r.stride());
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, r.samples().data(), stride, nullptr)) {
    throw ImageError(std::string("png encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, r.samples().data(), stride,
                                 nullptr)) {
    throw ImageError(std::string("png encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

Raster decode_png(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&img};
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw ImageError(std::string("png decode failed: ") + img.message);
  }
  const bool gray = (img.format & PNG_FORMAT_FLAG_COLOR) == 0;
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Raster r(static_cast<int>(img.width), static_cast<int>(img.height), gray ? 1 : 3);
  if (!png_image_finish_read(&img, nullptr, r.samples().data(),
                             static_cast<png_int_32>(r.stride()), nullptr)) {
    throw ImageError(std::string("png decode failed: ") + img.message);
  }
  return r;
}

std::vector<std::uint8_t> encode_raw(const Raster& r) {
  std::vector<std::uint8_t> out(std::begin(kRawMagic), std::end(kRawMagic));
  put_u32(out, static_cast<std::uint32_t>(r.width()));
  put_u32(out, static_cast<std::uint32_t>(r.height()));
  out.push_back(static_cast<std::uint8_t>(r.channels()));
  out.insert(out.end(), r.samples().begin(), r.samples().end());
  return out;
}

Raster decode_raw(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kRawHeader || !std::equal(std::begin(kRawMagic), std::end(kRawMagic), bytes.begin())) {
    throw ImageError("not a raw ERAI image");
  }
  const auto w = get_u32(bytes, 4);
  const auto h = get_u32(bytes, 8);
  const int c = bytes[12];
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) {
    throw ImageError("raw image has implausible dimensions");
  }
  check_shape(static_cast<int>(w), static_cast<int>(h), c);
  const std::size_t n = static_cast<std::size_t>(w) * h * c;
  if (bytes.size() != kRawHeader + n) {
    throw ImageError("raw image payload is " + std::to_string(bytes.size() - kRawHeader) +
                     " bytes, expected " + std::to_string(n));
  }
  return Raster(static_cast<int>(w), static_cast<int>(h), c, bytes.subspan(kRawHeader));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ImageError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageError("short write to " + path.string());
}

Raster read_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    if (bytes.size() >= 4 && std::equal(std::begin(kRawMagic), std::end(kRawMagic), bytes.begin())) {
      return decode_raw(bytes);
    }
    return decode_png(bytes);
  } catch (const ImageError& e) {
    throw ImageError(path.string() + ": " + e.what());
  }
}

ImageDims read_image_dims(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open " + path.string());
  std::uint8_t head[33] = {};
  in.read(reinterpret_cast<char*>(head), sizeof head);
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got >= kRawHeader && std::equal(std::begin(kRawMagic), std::end(kRawMagic), head)) {
    const std::span<const std::uint8_t> h(head, got);
    return {static_cast<int>(get_u32(h, 4)), static_cast<int>(get_u32(h, 8))};
  }
  // PNG: 8-byte signature, then the IHDR chunk with big-endian width/height.
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (got < 24 || !std::equal(std::begin(kPngSig), std::end(kPngSig), head) ||
      std::memcmp(head + 12, "IHDR", 4) != 0) {
    throw ImageError(path.string() + ": unrecognized image header");
  }
  auto be32 = [&](int at) {
    return static_cast<int>((std::uint32_t{head[at]} << 24) | (std::uint32_t{head[at + 1]} << 16) |
                            (std::uint32_t{head[at + 2]} << 8) | std::uint32_t{head[at + 3]});
  };
  return {be32(16), be32(20)};
}

void write_image(const std::filesystem::path& path, const Raster& r) {
  const auto ext = path.extension().string();
  if (ext == ".raw" || ext == ".erai") {
    write_file_bytes(path, encode_raw(r));
  } else {
    write_file_bytes(path, encode_png(r));
  }
}

}  // namespace panodet
