// AVX2 bilinear blend, eight output pixels per step. Callers reach it after a
// runtime CPU check.

#include <cstdint>
#include <stdexcept>

#include "panodet/resample.hpp"

#if defined(PANODET_HAVE_AVX2)
#include <immintrin.h>
#endif

namespace panodet {

#if defined(PANODET_HAVE_AVX2)

namespace {

__attribute__((target("avx2"))) inline __m256i load8(const std::vector<std::int32_t>& v, std::size_t i) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v.data() + i));
}

}  // namespace

__attribute__((target("avx2"))) void bilinear_blend_avx2(std::span<const std::uint8_t> src,
                                                         const BilinearTaps& taps, int channels,
                                                         std::span<std::uint8_t> dst) {
  constexpr int shift = 2 * BilinearTaps::kWeightBits;
  const std::size_t n = taps.size();
  // Every gather reads 4 bytes at a sample offset, so the source must carry
  // the raster tail padding.
  if (src.size() < Raster::kTailPadding) throw std::invalid_argument("unpadded source");

  const auto* base = reinterpret_cast<const int*>(src.data());
  const __m256i one = _mm256_set1_epi32(BilinearTaps::kWeightOne);
  const __m256i half = _mm256_set1_epi32(1 << (shift - 1));
  const __m256i byte_mask = _mm256_set1_epi32(0xFF);

  alignas(32) std::int32_t lanes[3][8];
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i g00 = _mm256_i32gather_epi32(base, load8(taps.off00, i), 1);
    const __m256i g01 = _mm256_i32gather_epi32(base, load8(taps.off01, i), 1);
    const __m256i g10 = _mm256_i32gather_epi32(base, load8(taps.off10, i), 1);
    const __m256i g11 = _mm256_i32gather_epi32(base, load8(taps.off11, i), 1);
    const __m256i wx = load8(taps.wx, i);
    const __m256i wy = load8(taps.wy, i);
    const __m256i iwx = _mm256_sub_epi32(one, wx);
    const __m256i iwy = _mm256_sub_epi32(one, wy);

    for (int c = 0; c < channels; ++c) {
      const __m128i sh = _mm_cvtsi32_si128(8 * c);
      const __m256i p00 = _mm256_and_si256(_mm256_srl_epi32(g00, sh), byte_mask);
      const __m256i p01 = _mm256_and_si256(_mm256_srl_epi32(g01, sh), byte_mask);
      const __m256i p10 = _mm256_and_si256(_mm256_srl_epi32(g10, sh), byte_mask);
      const __m256i p11 = _mm256_and_si256(_mm256_srl_epi32(g11, sh), byte_mask);
      const __m256i top = _mm256_add_epi32(_mm256_mullo_epi32(p00, iwx), _mm256_mullo_epi32(p01, wx));
      const __m256i bot = _mm256_add_epi32(_mm256_mullo_epi32(p10, iwx), _mm256_mullo_epi32(p11, wx));
      __m256i v = _mm256_add_epi32(_mm256_mullo_epi32(top, iwy), _mm256_mullo_epi32(bot, wy));
      v = _mm256_srli_epi32(_mm256_add_epi32(v, half), shift);
      _mm256_store_si256(reinterpret_cast<__m256i*>(lanes[c]), v);
    }
    std::uint8_t* out = dst.data() + i * channels;
    for (int k = 0; k < 8; ++k) {
      for (int c = 0; c < channels; ++c) out[k * channels + c] = static_cast<std::uint8_t>(lanes[c][k]);
    }
  }

  if (i < n) {
    BilinearTaps tail;
    tail.resize(n - i);
    for (std::size_t k = i; k < n; ++k) {
      tail.off00[k - i] = taps.off00[k];
      tail.off01[k - i] = taps.off01[k];
      tail.off10[k - i] = taps.off10[k];
      tail.off11[k - i] = taps.off11[k];
      tail.wx[k - i] = taps.wx[k];
      tail.wy[k - i] = taps.wy[k];
    }
    bilinear_blend_scalar(src, tail, channels, dst.subspan(i * channels));
  }
}

#else

void bilinear_blend_avx2(std::span<const std::uint8_t> src, const BilinearTaps& taps,
                         int channels, std::span<std::uint8_t> dst) {
  bilinear_blend_scalar(src, taps, channels, dst);
}

#endif

}  // namespace panodet
