// Reference bilinear blend. The vector kernels must match it byte for byte.

#include <cassert>
#include <cstdint>

#include "panodet/resample.hpp"

namespace panodet {

void bilinear_blend_scalar(std::span<const std::uint8_t> src, const BilinearTaps& taps,
                           int channels, std::span<std::uint8_t> dst) {
  constexpr std::int32_t one = BilinearTaps::kWeightOne;
  constexpr std::int32_t half = 1 << (2 * BilinearTaps::kWeightBits - 1);
  constexpr int shift = 2 * BilinearTaps::kWeightBits;
  const std::size_t n = taps.size();
  assert(dst.size() >= n * static_cast<std::size_t>(channels));

  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t wx = taps.wx[i];
    const std::int32_t wy = taps.wy[i];
    for (int c = 0; c < channels; ++c) {
      const std::int32_t p00 = src[taps.off00[i] + c];
      const std::int32_t p01 = src[taps.off01[i] + c];
      const std::int32_t p10 = src[taps.off10[i] + c];
      const std::int32_t p11 = src[taps.off11[i] + c];
      const std::int32_t top = p00 * (one - wx) + p01 * wx;
      const std::int32_t bot = p10 * (one - wx) + p11 * wx;
      dst[i * channels + c] = static_cast<std::uint8_t>((top * (one - wy) + bot * wy + half) >> shift);
    }
  }
}

}  // namespace panodet
