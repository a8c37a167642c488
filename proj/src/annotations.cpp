#include "panodet/annotations.hpp"

#include <algorithm>
#include <cmath>

namespace panodet {

EraBox make_era_box(std::string label, double cx, double cy, double w, double h, ImageDims dims) {
  const double width = dims.width;
  EraBox b;
  b.label = std::move(label);
  b.w = std::clamp(w, 0.0, width);
  b.h = std::clamp(h, 0.0, static_cast<double>(dims.height));
  double x = std::fmod(cx, width);
  if (x < 0.0) x += width;
  if (x >= width) x = 0.0;
  b.cx = x;
  b.cy = std::clamp(cy, 0.0, static_cast<double>(dims.height));
  b.wraps = b.w > 0.0 && b.w < width && (b.left() < 0.0 || b.right() > width);
  return b;
}

EraBox era_hull(std::string label, std::span<const PixelCoord> points, ImageDims dims,
                bool encloses_north, bool encloses_south) {
  if (points.empty()) throw GeometryError("hull of an empty point set");
  const double width = dims.width;
  const double height = dims.height;

  std::vector<double> xs;
  xs.reserve(points.size());
  double top = height, bottom = 0.0;
  for (const auto& p : points) {
    double x = std::fmod(p.x, width);
    if (x < 0.0) x += width;
    xs.push_back(x);
    top = std::min(top, p.y);
    bottom = std::max(bottom, p.y);
  }
  if (encloses_north) top = 0.0;
  if (encloses_south) bottom = height;
  top = std::clamp(top, 0.0, height);
  bottom = std::clamp(bottom, 0.0, height);

  double left = 0.0, right = width;
  if (!encloses_north && !encloses_south) {
    std::sort(xs.begin(), xs.end());
    // The complement of the largest empty arc is the shortest covering arc.
    double best_gap = xs.front() + width - xs.back();
    left = xs.front();
    right = xs.back();
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double gap = xs[i + 1] - xs[i];
      if (gap > best_gap) {
        best_gap = gap;
        left = xs[i + 1];
        right = xs[i] + width;
      }
    }
  }
  return make_era_box(std::move(label), (left + right) / 2.0, (top + bottom) / 2.0, right - left,
                      bottom - top, dims);
}

std::vector<PixelCoord> rectangle_perimeter(double x, double y, double w, double h,
                                            int samples_per_edge) {
  const int n = std::max(1, samples_per_edge);
  std::vector<PixelCoord> pts;
  pts.reserve(static_cast<std::size_t>(4 * n));
  const PixelCoord corners[5] = {{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}, {x, y}};
  for (int e = 0; e < 4; ++e) {
    const PixelCoord a = corners[e];
    const PixelCoord b = corners[e + 1];
    for (int k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / n;
      pts.push_back({a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t});
    }
  }
  return pts;
}

WindowSpec bfov_view(const Bfov& b) {
  if (!(b.extent_lat > 0.0) || !(b.extent_lon > 0.0)) {
    throw GeometryError("degenerate BFOV extent for '" + b.label + "'");
  }
  WindowSpec view;
  view.center = canonical(b.center.lat, b.center.lon);
  view.params = ProjectionParams{0.0, b.extent_lat, b.extent_lon};
  view.out_w = 2;
  view.out_h = 2;
  view.validate();
  return view;
}

std::vector<SphereCoord> bfov_perimeter(const Bfov& b, int samples_per_edge) {
  const WindowSpec view = bfov_view(b);
  const WindowFrame frame(view);
  std::vector<SphereCoord> out;
  for (const auto& px : rectangle_perimeter(0.0, 0.0, view.out_w, view.out_h, samples_per_edge)) {
    out.push_back(frame.to_sphere(px));
  }
  return out;
}

EraBox bfov_to_erabox(const Bfov& b, ImageDims dims) {
  const WindowSpec view = bfov_view(b);
  const WindowFrame frame(view);
  std::vector<PixelCoord> pts;
  for (const auto& s : bfov_perimeter(b)) pts.push_back(sphere_to_era_pixel(dims, s));
  const bool north = frame.to_pixel({kHalfPi, 0.0}).visible;
  const bool south = frame.to_pixel({-kHalfPi, 0.0}).visible;
  return era_hull(b.label, pts, dims, north, south);
}

const std::string& GroundTruth::label() const noexcept {
  return std::visit([](const auto& s) -> const std::string& { return s.label; }, shape);
}

EraBox ground_truth_box(const GroundTruth& gt, ImageDims dims) {
  if (const auto* b = std::get_if<Bfov>(&gt.shape)) return bfov_to_erabox(*b, dims);
  return std::get<EraBox>(gt.shape);
}

const FrameAnnotations* Dataset::find(const std::string& id) const {
  for (const auto& f : frames) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

std::string_view to_string(EntrySource s) noexcept {
  return s == EntrySource::corrected ? "corrected" : "bfov-derived";
}

double degrees_for_output(double radians) {
  const double rounded = std::round(rad_to_deg(radians) * 1e6) / 1e6;
  if (deg_to_rad(rounded) == radians) return rounded;
  double deg = rad_to_deg(radians);
  for (int step = 0; step < 8 && deg_to_rad(deg) != radians; ++step) {
    deg = std::nextafter(deg, deg_to_rad(deg) < radians ? INFINITY : -INFINITY);
  }
  return deg;
}

}  // namespace panodet
