#pragma once

// Angular math for sub-window projections of the viewing sphere.
//
// The sphere-to-plane map is the d-parameterized family
//
//     p = (d + 1) sin(t) / (d + cos(t))
//
// applied separably: the vertical offset drives plane y, the horizontal
// offset drives plane x. d = 0 is perspective (p = tan t), d = 1 is
// stereographic (p = 2 tan(t/2)). All angles are radians.

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace panodet {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double deg_to_rad(double deg) noexcept { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) noexcept { return rad * (180.0 / kPi); }

class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Direction on the viewing sphere. Canonical form: lat in [-pi/2, pi/2],
/// lon in [-pi, pi), lon = 0 at the poles.
struct SphereCoord {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const SphereCoord&, const SphereCoord&) = default;
};

/// Wraps lon into [-pi, pi), clamps lat, zeroes lon at the poles.
SphereCoord canonical(double lat, double lon);

/// Position on the tangent plane z = 1 (dimensionless).
struct PlaneCoord {
  double x = 0.0;
  double y = 0.0;
};

/// Continuous pixel position. Pixel (i, j) covers [i, i+1) x [j, j+1).
struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
};

struct ProjectionParams {
  double d = 1.0;
  double fov_h = kPi;
  double fov_w = kPi;

  void validate() const;
};

struct WindowSpec {
  SphereCoord center;
  ProjectionParams params;
  int out_w = 864;
  int out_h = 864;

  void validate() const;
};

struct WindowHit {
  PixelCoord px;
  bool visible = false;
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// (cos lat sin lon, sin lat, cos lat cos lon); (0, 0) is +z.
Vec3 to_unit_vector(SphereCoord s);
SphereCoord from_unit_vector(const Vec3& v);

/// Planar coordinate of an angular offset along one axis.
double project_axis(double offset, double d);

/// Inverse of project_axis. Solves p(d-1)t^2 - 2(d+1)t + p(d+1) = 0 for
/// t = tan(offset/2), taking the root that is continuous through p = 0.
double unproject_axis(double p, double d);

/// Precomputed per-window state: plane half extents and the rotation that
/// carries the projection axis (+z) onto the window center.
class WindowFrame {
 public:
  explicit WindowFrame(const WindowSpec& spec);

  const WindowSpec& spec() const noexcept { return spec_; }
  double half_x() const noexcept { return half_x_; }
  double half_y() const noexcept { return half_y_; }

  PlaneCoord pixel_to_plane(PixelCoord px) const noexcept;
  PixelCoord plane_to_pixel(PlaneCoord p) const noexcept;

  /// Horizontal offset for plane x / vertical offset for plane y.
  double horizontal_offset(double plane_x) const;
  double vertical_offset(double plane_y) const;

  /// Window-local direction for (vertical, horizontal) offsets, given their
  /// sines and cosines.
  static Vec3 local_direction(double sin_v, double cos_v, double sin_h,
                              double cos_h) noexcept;

  Vec3 local_to_world(const Vec3& v) const noexcept;
  Vec3 world_to_local(const Vec3& v) const noexcept;

  SphereCoord to_sphere(PixelCoord px) const;
  WindowHit to_pixel(SphereCoord s) const noexcept;

  /// Planar distance of a pixel from the window center, normalized by the
  /// center-to-corner distance.
  double normalized_center_distance(PixelCoord px) const noexcept;

 private:
  WindowSpec spec_;
  double half_x_ = 0.0;
  double half_y_ = 0.0;
  Mat3 rot_{};  // world = rot_ * local
};

SphereCoord window_to_sphere(const WindowSpec& w, PixelCoord px);
WindowHit sphere_to_window(const WindowSpec& w, SphereCoord s);

/// Four 180x180 degree stereographic windows on the equator, centers every
/// 90 degrees of longitude starting at -180.
std::vector<WindowSpec> default_window_plan(int out_w = 864, int out_h = 864);

/// Great-circle angle between two directions.
double angular_distance(SphereCoord a, SphereCoord b);

}  // namespace panodet
