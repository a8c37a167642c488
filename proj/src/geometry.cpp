#include "panodet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace panodet {

namespace {

constexpr double kAngleSlack = 1e-12;

double wrap_lon(double lon) {
  if (lon >= -kPi && lon < kPi) return lon;
  double l = std::fmod(lon + kPi, kTwoPi);
  if (l < 0.0) l += kTwoPi;
  l -= kPi;
  if (l >= kPi) l = -kPi;
  return l;
}

void check_d(double d) {
  if (!(d >= 0.0) || !std::isfinite(d)) {
    throw GeometryError("projection parameter d must be finite and >= 0, got " +
                        std::to_string(d));
  }
}

}  // namespace

SphereCoord canonical(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon)) {
    throw GeometryError("non-finite sphere coordinate");
  }
  lat = std::clamp(lat, -kHalfPi, kHalfPi);
  if (lat == kHalfPi || lat == -kHalfPi) return {lat, 0.0};
  return {lat, wrap_lon(lon)};
}

void ProjectionParams::validate() const {
  check_d(d);
  for (double fov : {fov_h, fov_w}) {
    if (!(fov > 0.0) || fov > kPi) {
      throw GeometryError("field of view must lie in (0, pi], got " + std::to_string(fov));
    }
    const double half = fov / 2.0;
    if (d == 0.0 && half >= kHalfPi) {
      throw GeometryError("perspective projection needs a field of view below pi");
    }
    if (d + std::cos(half) <= 0.0) {
      throw GeometryError("field of view exceeds the projection domain for d = " +
                          std::to_string(d));
    }
  }
}

void WindowSpec::validate() const {
  params.validate();
  if (out_w < 2 || out_h < 2) {
    throw GeometryError("window raster must be at least 2x2");
  }
  if (!(center.lat >= -kHalfPi && center.lat <= kHalfPi) || !(center.lon >= -kPi && center.lon < kPi)) {
    throw GeometryError("window center is not canonical");
  }
}

Vec3 to_unit_vector(SphereCoord s) {
  const double cl = std::cos(s.lat);
  return {cl * std::sin(s.lon), std::sin(s.lat), cl * std::cos(s.lon)};
}

SphereCoord from_unit_vector(const Vec3& v) {
  const double r = std::hypot(v[0], v[2]);
  const double lat = std::atan2(v[1], r);
  if (r == 0.0) return canonical(lat, 0.0);
  return canonical(lat, std::atan2(v[0], v[2]));
}

double project_axis(double offset, double d) {
  check_d(d);
  if (!std::isfinite(offset) || std::abs(offset) >= kPi) {
    throw GeometryError("offset must satisfy |offset| < pi");
  }
  if (d == 0.0 && std::abs(offset) >= kHalfPi) {
    throw GeometryError("perspective offset must satisfy |offset| < pi/2");
  }
  // Past 90 degrees, d + cos(t) is formed as (d - 1) + 2 cos^2(t/2) to keep
  // precision near the stereographic antipode.
  const double c = std::cos(offset / 2.0);
  const double denom = std::abs(offset) > kHalfPi ? (d - 1.0) + 2.0 * c * c : d + std::cos(offset);
  if (denom <= 0.0) {
    throw GeometryError("offset " + std::to_string(offset) +
                        " lies outside the projection domain for d = " + std::to_string(d));
  }
  return (d + 1.0) * std::sin(offset) / denom;
}

double unproject_axis(double p, double d) {
  check_d(d);
  if (!std::isfinite(p)) throw GeometryError("plane coordinate must be finite");
  const double a = d + 1.0;
  const double disc = a * a - p * p * (d * d - 1.0);
  if (disc < 0.0) {
    throw GeometryError("plane coordinate " + std::to_string(p) +
                        " exceeds the projection range for d = " + std::to_string(d));
  }
  // Rationalized small root of the quadratic in tan(t/2); stable near p = 0
  // and reduces to p/2 at d = 1.
  const double t = p * a / (a + std::sqrt(disc));
  return 2.0 * std::atan(t);
}

WindowFrame::WindowFrame(const WindowSpec& spec) : spec_(spec) {
  spec_.validate();
  half_x_ = project_axis(spec_.params.fov_w / 2.0, spec_.params.d);
  half_y_ = project_axis(spec_.params.fov_h / 2.0, spec_.params.d);

  // rot = Ry(lon) * Rx(-lat); columns are the world images of the local axes.
  const double sa = std::sin(spec_.center.lat), ca = std::cos(spec_.center.lat);
  const double sb = std::sin(spec_.center.lon), cb = std::cos(spec_.center.lon);
  rot_ = {{{cb, -sb * sa, sb * ca},
           {0.0, ca, sa},
           {-sb, -cb * sa, cb * ca}}};
}

PlaneCoord WindowFrame::pixel_to_plane(PixelCoord px) const noexcept {
  return {(2.0 * px.x / spec_.out_w - 1.0) * half_x_,
          (1.0 - 2.0 * px.y / spec_.out_h) * half_y_};
}

PixelCoord WindowFrame::plane_to_pixel(PlaneCoord p) const noexcept {
  return {(p.x / half_x_ + 1.0) * 0.5 * spec_.out_w,
          (1.0 - p.y / half_y_) * 0.5 * spec_.out_h};
}

double WindowFrame::horizontal_offset(double plane_x) const {
  return unproject_axis(plane_x, spec_.params.d);
}

double WindowFrame::vertical_offset(double plane_y) const {
  return unproject_axis(plane_y, spec_.params.d);
}

Vec3 WindowFrame::local_direction(double sin_v, double cos_v, double sin_h,
                                  double cos_h) noexcept {
  return {cos_v * sin_h, sin_v, cos_v * cos_h};
}

Vec3 WindowFrame::local_to_world(const Vec3& v) const noexcept {
  Vec3 out{};
  for (int r = 0; r < 3; ++r) {
    out[r] = rot_[r][0] * v[0] + rot_[r][1] * v[1] + rot_[r][2] * v[2];
  }
  return out;
}

Vec3 WindowFrame::world_to_local(const Vec3& v) const noexcept {
  Vec3 out{};
  for (int c = 0; c < 3; ++c) {
    out[c] = rot_[0][c] * v[0] + rot_[1][c] * v[1] + rot_[2][c] * v[2];
  }
  return out;
}

SphereCoord WindowFrame::to_sphere(PixelCoord px) const {
  const PlaneCoord p = pixel_to_plane(px);
  const double h = horizontal_offset(p.x);
  const double v = vertical_offset(p.y);
  const Vec3 local = local_direction(std::sin(v), std::cos(v), std::sin(h), std::cos(h));
  return from_unit_vector(local_to_world(local));
}

WindowHit WindowFrame::to_pixel(SphereCoord s) const noexcept {
  const Vec3 local = world_to_local(to_unit_vector(s));
  const double r = std::hypot(local[0], local[2]);
  const double v = std::atan2(local[1], r);
  const double h = r == 0.0 ? 0.0 : std::atan2(local[0], local[2]);

  const ProjectionParams& pp = spec_.params;
  WindowHit hit;
  if (std::abs(h) > pp.fov_w / 2.0 + kAngleSlack || std::abs(v) > pp.fov_h / 2.0 + kAngleSlack) {
    return hit;
  }
  if (pp.d + std::cos(h) <= 0.0 || pp.d + std::cos(v) <= 0.0) return hit;
  if (pp.d == 0.0 && (std::abs(h) >= kHalfPi || std::abs(v) >= kHalfPi)) return hit;

  const double hc = std::clamp(h, -pp.fov_w / 2.0, pp.fov_w / 2.0);
  const double vc = std::clamp(v, -pp.fov_h / 2.0, pp.fov_h / 2.0);
  const PlaneCoord plane{(pp.d + 1.0) * std::sin(hc) / (pp.d + std::cos(hc)),
                         (pp.d + 1.0) * std::sin(vc) / (pp.d + std::cos(vc))};
  hit.px = plane_to_pixel(plane);
  hit.visible = true;
  return hit;
}

double WindowFrame::normalized_center_distance(PixelCoord px) const noexcept {
  const PlaneCoord p = pixel_to_plane(px);
  return std::hypot(p.x, p.y) / std::hypot(half_x_, half_y_);
}

SphereCoord window_to_sphere(const WindowSpec& w, PixelCoord px) {
  return WindowFrame(w).to_sphere(px);
}

WindowHit sphere_to_window(const WindowSpec& w, SphereCoord s) {
  return WindowFrame(w).to_pixel(s);
}

std::vector<WindowSpec> default_window_plan(int out_w, int out_h) {
  std::vector<WindowSpec> plan;
  for (double lon_deg : {-180.0, -90.0, 0.0, 90.0}) {
    WindowSpec w;
    w.center = canonical(0.0, deg_to_rad(lon_deg));
    w.params = ProjectionParams{1.0, kPi, kPi};
    w.out_w = out_w;
    w.out_h = out_h;
    plan.push_back(w);
  }
  return plan;
}

double angular_distance(SphereCoord a, SphereCoord b) {
  const Vec3 u = to_unit_vector(a);
  const Vec3 v = to_unit_vector(b);
  const Vec3 c{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  return std::atan2(std::hypot(c[0], c[1], c[2]), dot);
}

}  // namespace panodet
