#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "panodet/geometry.hpp"
#include "panodet/image.hpp"

namespace panodet {

enum class SimdLevel { scalar, avx2 };

std::string_view to_string(SimdLevel level) noexcept;

/// Best kernel the CPU supports. PANODET_SIMD=scalar in the environment
/// forces the reference kernel.
SimdLevel detected_simd_level();
bool simd_level_available(SimdLevel level);

/// Bilinear taps for one run of output pixels: byte offsets of the four
/// source neighbors and fixed-point weights in [0, kWeightOne].
struct BilinearTaps {
  static constexpr int kWeightBits = 8;
  static constexpr std::int32_t kWeightOne = 1 << kWeightBits;

  std::vector<std::int32_t> off00, off01, off10, off11;
  std::vector<std::int32_t> wx, wy;

  void resize(std::size_t n);
  std::size_t size() const noexcept { return wx.size(); }
};

/// Fills taps[i] for a continuous ERA coordinate with longitude wrap and
/// latitude clamp.
void set_era_tap(BilinearTaps& taps, std::size_t i, ImageDims dims, int channels,
                 PixelCoord era_px) noexcept;

/// Blends taps into dst (taps.size() * channels bytes). src must include the
/// raster tail padding.
void bilinear_blend_scalar(std::span<const std::uint8_t> src, const BilinearTaps& taps,
                           int channels, std::span<std::uint8_t> dst);
void bilinear_blend_avx2(std::span<const std::uint8_t> src, const BilinearTaps& taps,
                         int channels, std::span<std::uint8_t> dst);
void bilinear_blend(SimdLevel level, std::span<const std::uint8_t> src,
                    const BilinearTaps& taps, int channels, std::span<std::uint8_t> dst);

struct RenderOptions {
  SimdLevel simd = detected_simd_level();
  int threads = 1;
};

/// Samples each output pixel center through window_to_sphere and the ERA
/// pixel mapping. Output is identical across kernels and thread counts.
WindowImage render_window(const EraImage& src, const WindowSpec& spec,
                          const RenderOptions& opts = {});

}  // namespace panodet
