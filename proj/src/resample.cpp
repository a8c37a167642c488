#include "panodet/resample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace panodet {

std::string_view to_string(SimdLevel level) noexcept {
  switch (level) {
    case SimdLevel::scalar: return "scalar";
    case SimdLevel::avx2: return "avx2";
  }
  return "unknown";
}

bool simd_level_available(SimdLevel level) {
  switch (level) {
    case SimdLevel::scalar: return true;
    case SimdLevel::avx2:
#if defined(PANODET_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

SimdLevel detected_simd_level() {
  if (const char* forced = std::getenv("PANODET_SIMD")) {
    if (std::string_view(forced) == "scalar") return SimdLevel::scalar;
  }
  return simd_level_available(SimdLevel::avx2) ? SimdLevel::avx2 : SimdLevel::scalar;
}

void BilinearTaps::resize(std::size_t n) {
  for (auto* v : {&off00, &off01, &off10, &off11, &wx, &wy}) v->resize(n);
}

void set_era_tap(BilinearTaps& taps, std::size_t i, ImageDims dims, int channels,
                 PixelCoord era_px) noexcept {
  // Sample centers sit at half-integer coordinates.
  const double sx = era_px.x - 0.5;
  const double sy = era_px.y - 0.5;
  const double fx0 = std::floor(sx);
  const double fy0 = std::floor(sy);

  auto wrap = [w = dims.width](long x) {
    long r = x % w;
    return r < 0 ? r + w : r;
  };
  const long x0 = wrap(static_cast<long>(fx0));
  const long x1 = wrap(static_cast<long>(fx0) + 1);
  const long y0 = std::clamp(static_cast<long>(fy0), 0L, static_cast<long>(dims.height - 1));
  const long y1 = std::clamp(static_cast<long>(fy0) + 1, 0L, static_cast<long>(dims.height - 1));

  const auto row0 = y0 * dims.width;
  const auto row1 = y1 * dims.width;
  taps.off00[i] = static_cast<std::int32_t>((row0 + x0) * channels);
  taps.off01[i] = static_cast<std::int32_t>((row0 + x1) * channels);
  taps.off10[i] = static_cast<std::int32_t>((row1 + x0) * channels);
  taps.off11[i] = static_cast<std::int32_t>((row1 + x1) * channels);
  taps.wx[i] = static_cast<std::int32_t>(std::lround((sx - fx0) * BilinearTaps::kWeightOne));
  taps.wy[i] = static_cast<std::int32_t>(std::lround((sy - fy0) * BilinearTaps::kWeightOne));
}

void bilinear_blend(SimdLevel level, std::span<const std::uint8_t> src, const BilinearTaps& taps,
                    int channels, std::span<std::uint8_t> dst) {
  if (level == SimdLevel::avx2 && simd_level_available(SimdLevel::avx2)) {
    bilinear_blend_avx2(src, taps, channels, dst);
  } else {
    bilinear_blend_scalar(src, taps, channels, dst);
  }
}

WindowImage render_window(const EraImage& src, const WindowSpec& spec, const RenderOptions& opts) {
  const WindowFrame frame(spec);
  const ImageDims dims = src.dims();
  const Raster& in = src.raster();
  const int channels = in.channels();

  // The map is separable up to the rotation: horizontal offsets depend only
  // on the column, vertical offsets only on the row.
  std::vector<double> sin_h(spec.out_w), cos_h(spec.out_w);
  for (int i = 0; i < spec.out_w; ++i) {
    const double h = frame.horizontal_offset(frame.pixel_to_plane({i + 0.5, 0.0}).x);
    sin_h[i] = std::sin(h);
    cos_h[i] = std::cos(h);
  }
  std::vector<double> sin_v(spec.out_h), cos_v(spec.out_h);
  for (int j = 0; j < spec.out_h; ++j) {
    const double v = frame.vertical_offset(frame.pixel_to_plane({0.0, j + 0.5}).y);
    sin_v[j] = std::sin(v);
    cos_v[j] = std::cos(v);
  }

  WindowImage out{spec, Raster(spec.out_w, spec.out_h, channels)};
  const std::size_t row_bytes = out.raster.stride();
  std::uint8_t* const out_base = out.raster.samples().data();

  auto render_rows = [&](int row_begin, int row_end) {
    BilinearTaps taps;
    taps.resize(static_cast<std::size_t>(spec.out_w));
    for (int j = row_begin; j < row_end; ++j) {
      for (int i = 0; i < spec.out_w; ++i) {
        const Vec3 local = WindowFrame::local_direction(sin_v[j], cos_v[j], sin_h[i], cos_h[i]);
        const SphereCoord s = from_unit_vector(frame.local_to_world(local));
        set_era_tap(taps, static_cast<std::size_t>(i), dims, channels, sphere_to_era_pixel(dims, s));
      }
      bilinear_blend(opts.simd, in.padded(), taps, channels,
                     {out_base + static_cast<std::size_t>(j) * row_bytes, row_bytes});
    }
  };

  const int threads = std::clamp(opts.threads, 1, spec.out_h);
  if (threads == 1) {
    render_rows(0, spec.out_h);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (spec.out_h + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int b = t * chunk;
      const int e = std::min(spec.out_h, b + chunk);
      if (b < e) pool.emplace_back(render_rows, b, e);
    }
  }
  return out;
}

}  // namespace panodet
