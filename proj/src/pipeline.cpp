#include "panodet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace panodet {

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "frame failed:";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

}  // namespace

FrameError::FrameError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

std::vector<WindowDetection> detect_window(DetectorPort& detector, const WindowImage& win,
                                           int window_index) {
  std::vector<WindowDetection> raw = detector.detect(win, window_index);
  const double W = win.raster.width();
  const double H = win.raster.height();
  std::vector<WindowDetection> out;
  out.reserve(raw.size());
  for (auto& d : raw) {
    if (!std::isfinite(d.score) || d.score < 0.0 || d.score > 1.0) {
      throw DetectorError(DetectorError::Kind::malformed_output,
                          "window " + std::to_string(window_index) + ": score " +
                              std::to_string(d.score) + " outside [0, 1]");
    }
    const WindowRect& r = d.rect;
    if (!std::isfinite(r.x) || !std::isfinite(r.y) || !std::isfinite(r.w) || !std::isfinite(r.h) ||
        r.w < 0.0 || r.h < 0.0) {
      throw DetectorError(DetectorError::Kind::malformed_output,
                          "window " + std::to_string(window_index) + ": invalid rectangle");
    }
    if (d.label.empty()) {
      throw DetectorError(DetectorError::Kind::malformed_output,
                          "window " + std::to_string(window_index) + ": empty label");
    }
    const double x0 = std::clamp(r.x, 0.0, W);
    const double y0 = std::clamp(r.y, 0.0, H);
    const double x1 = std::clamp(r.x + r.w, 0.0, W);
    const double y1 = std::clamp(r.y + r.h, 0.0, H);
    if (x1 <= x0 || y1 <= y0) continue;
    d.rect = {x0, y0, x1 - x0, y1 - y0};
    out.push_back(std::move(d));
  }
  return out;
}

void RealignParams::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("realign sigma must be positive");
}

MinFrame backproject_min_frame(const WindowDetection& wd, const WindowSpec& spec, ImageDims dims) {
  const WindowRect& r = wd.rect;
  if (!(r.w > 0.0) || !(r.h > 0.0)) throw GeometryError("degenerate detection rectangle");
  const WindowFrame frame(spec);

  std::vector<PixelCoord> pts;
  for (const auto& px : rectangle_perimeter(r.x, r.y, r.w, r.h)) {
    pts.push_back(sphere_to_era_pixel(dims, frame.to_sphere(px)));
  }
  auto encloses = [&](double lat) {
    const WindowHit hit = frame.to_pixel({lat, 0.0});
    return hit.visible && hit.px.x > r.x && hit.px.x < r.x + r.w && hit.px.y > r.y &&
           hit.px.y < r.y + r.h;
  };
  MinFrame out;
  out.frame = era_hull(wd.label, pts, dims, encloses(kHalfPi), encloses(-kHalfPi));
  out.center_dist = std::min(1.0, frame.normalized_center_distance(r.center()));
  return out;
}

double realign_factor(double center_dist, double sigma) {
  return std::exp(-(center_dist * center_dist) / sigma);
}

EraBox realign(const EraBox& raw, double center_dist, const RealignParams& p, ImageDims dims) {
  p.validate();
  const double f = realign_factor(center_dist, p.sigma);
  EraBox out = make_era_box(raw.label, raw.cx, raw.cy, raw.w * f, raw.h * f, dims);
  out.cx = raw.cx;
  out.cy = raw.cy;
  return out;
}

std::vector<Detection> run_frame(const EraImage& era, std::span<const WindowSpec> plan,
                                 DetectorPort& detector, const RealignParams& p,
                                 const RunOptions& opts) {
  p.validate();
  const ImageDims dims = era.dims();
  std::vector<std::vector<Detection>> per_window(plan.size());
  std::vector<std::string> errors(plan.size());

  auto process = [&](std::size_t k) {
    try {
      const WindowImage win = render_window(era, plan[k], opts.render);
      const int index = static_cast<int>(k);
      for (const auto& wd : detect_window(detector, win, index)) {
        const MinFrame mf = backproject_min_frame(wd, plan[k], dims);
        per_window[k].push_back(
            {wd.label, wd.score, realign(mf.frame, mf.center_dist, p, dims), index, mf.center_dist});
      }
    } catch (const std::exception& e) {
      errors[k] = "window " + std::to_string(k) + ": " + e.what();
    }
  };

  if (opts.parallel_windows && detector.concurrent_safe() && plan.size() > 1) {
    std::vector<std::jthread> workers;
    for (std::size_t k = 0; k < plan.size(); ++k) workers.emplace_back(process, k);
  } else {
    for (std::size_t k = 0; k < plan.size(); ++k) process(k);
  }

  std::vector<std::string> failed;
  for (const auto& e : errors) {
    if (!e.empty()) failed.push_back(e);
  }
  if (!failed.empty()) throw FrameError(std::move(failed));

  std::vector<Detection> out;
  for (auto& v : per_window) {
    out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  }
  return out;
}

}  // namespace panodet
