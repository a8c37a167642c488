#include <doctest.h>

#include <cmath>

#include "panodet/geometry.hpp"
#include "support/random.hpp"

using namespace panodet;
using panodet::testing::Gen;

TEST_CASE("project_axis examples") {
  for (double d : {0.0, 0.5, 1.0, 2.0}) CHECK(project_axis(0.0, d) == 0.0);
  CHECK(project_axis(kHalfPi, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(project_axis(kPi / 4, 0.0) - 1.0) < 1e-15);
}

TEST_CASE("project_axis matches tan and stereographic over a dense grid") {
  for (int i = 0; i <= 1000; ++i) {
    const double t = (-0.49 + 0.98 * i / 1000.0) * kPi;
    CHECK(std::abs(project_axis(t, 0.0) - std::tan(t)) < 1e-12);
    const double s = (-0.99 + 1.98 * i / 1000.0) * kPi;
    CHECK(std::abs(project_axis(s, 1.0) - 2.0 * std::tan(s / 2.0)) < 1e-12);
  }
}

TEST_CASE("project_axis is odd and strictly increasing") {
  for (double d : {0.0, 0.3, 1.0, 1.7}) {
    const double limit = (d <= 1.0 ? std::acos(-d) : std::acos(-1.0 / d)) * 0.999;
    double prev = -INFINITY;
    for (int i = 1; i < 400; ++i) {
      const double t = -limit + 2.0 * limit * i / 400.0;
      const double p = project_axis(t, d);
      CHECK(p > prev);
      CHECK(project_axis(-t, d) == -p);
      prev = p;
    }
  }
}

TEST_CASE("project_axis domain errors") {
  CHECK_THROWS_AS(project_axis(kHalfPi, 0.0), GeometryError);
  CHECK_THROWS_AS(project_axis(kPi, 1.0), GeometryError);
  CHECK_THROWS_AS(project_axis(2.5, 0.5), GeometryError);  // 0.5 + cos(2.5) < 0
  CHECK_THROWS_AS(project_axis(0.1, -1.0), GeometryError);
}

TEST_CASE("unproject_axis examples") {
  CHECK(unproject_axis(0.0, 1.0) == 0.0);
  CHECK(std::abs(unproject_axis(2.0, 1.0) - kHalfPi) < 1e-15);
  CHECK(std::abs(unproject_axis(1.0, 0.0) - kPi / 4) < 1e-15);
  for (double p : {-7.0, -0.3, 0.01, 5.0}) {
    CHECK(std::abs(unproject_axis(p, 1.0) - 2.0 * std::atan(p / 2.0)) < 1e-14);
    CHECK(std::abs(unproject_axis(p, 0.0) - std::atan(p)) < 1e-14);
  }
}

TEST_CASE("unproject_axis rejects values beyond the range for d > 1") {
  // Range for d > 1 peaks at (d + 1) / sqrt(d^2 - 1).
  const double d = 2.0;
  const double peak = 3.0 / std::sqrt(3.0);
  CHECK_NOTHROW(unproject_axis(peak * 0.999, d));
  CHECK_THROWS_AS(unproject_axis(peak * 1.001, d), GeometryError);
  CHECK_THROWS_AS(unproject_axis(NAN, 1.0), GeometryError);
}

TEST_CASE("axis round trip") {
  Gen g(7);
  for (double d : {0.0, 0.5, 1.0}) {
    const double limit = d == 0.0 ? kHalfPi : (d == 0.5 ? std::acos(-0.5) : kPi);
    for (int i = 0; i < 2000; ++i) {
      const double t = g.uniform(-limit, limit) * 0.999;
      CHECK(std::abs(unproject_axis(project_axis(t, d), d) - t) < 1e-9);
    }
  }
}

TEST_CASE("canonical wraps longitude and pins poles") {
  CHECK(canonical(0.0, kPi).lon == -kPi);
  CHECK(std::abs(canonical(0.0, 3 * kPi / 2).lon + kHalfPi) < 1e-15);
  CHECK(canonical(kHalfPi, 1.0).lon == 0.0);
  CHECK(canonical(2.0, 0.5).lat == kHalfPi);
  CHECK_THROWS_AS(canonical(NAN, 0.0), GeometryError);
}

TEST_CASE("window center maps to the center pixel") {
  Gen g(11);
  for (int i = 0; i < 200; ++i) {
    WindowSpec w;
    w.center = g.direction();
    w.params.d = g.uniform(0.0, 1.0);
    w.params.fov_w = g.uniform(0.2, 2.5);
    w.params.fov_h = g.uniform(0.2, 2.5);
    w.out_w = g.integer(2, 900);
    w.out_h = g.integer(2, 900);
    const SphereCoord s = window_to_sphere(w, {w.out_w / 2.0, w.out_h / 2.0});
    CHECK(angular_distance(s, w.center) < 1e-9);
    const WindowHit hit = sphere_to_window(w, w.center);
    CHECK(hit.visible);
    CHECK(std::abs(hit.px.x - w.out_w / 2.0) < 1e-9);
    CHECK(std::abs(hit.px.y - w.out_h / 2.0) < 1e-9);
  }
}

TEST_CASE("edge midline of 180 degree stereographic windows") {
  WindowSpec w;
  w.out_w = w.out_h = 864;
  SphereCoord left = window_to_sphere(w, {0.0, 432.0});
  SphereCoord right = window_to_sphere(w, {864.0, 432.0});
  CHECK(std::abs(left.lon + kHalfPi) < 1e-12);
  CHECK(std::abs(right.lon - kHalfPi) < 1e-12);
  CHECK(std::abs(left.lat) < 1e-12);

  w.center = {0.0, kHalfPi};
  left = window_to_sphere(w, {0.0, 432.0});
  right = window_to_sphere(w, {864.0, 432.0});
  CHECK(std::abs(left.lon) < 1e-12);
  CHECK(std::abs(std::abs(right.lon) - kPi) < 1e-12);
}

TEST_CASE("antipode is not visible") {
  Gen g(3);
  for (int i = 0; i < 100; ++i) {
    WindowSpec w;
    w.center = g.direction();
    const Vec3 v = to_unit_vector(w.center);
    const SphereCoord anti = from_unit_vector({-v[0], -v[1], -v[2]});
    CHECK_FALSE(sphere_to_window(w, anti).visible);
  }
}

TEST_CASE("angle from the window axis matches the separable offsets") {
  // The local direction for offsets (h, v) sits at acos(cos v cos h) from the
  // projection axis, wherever the window is centered.
  Gen g(5);
  for (int i = 0; i < 500; ++i) {
    WindowSpec w;
    w.center = g.direction();
    w.params.d = g.uniform(0.0, 1.0);
    w.params.fov_w = w.params.fov_h = 2.0;
    const WindowFrame f(w);
    const PixelCoord px{g.uniform(0.0, w.out_w), g.uniform(0.0, w.out_h)};
    const PlaneCoord p = f.pixel_to_plane(px);
    const double h = unproject_axis(p.x, w.params.d);
    const double v = unproject_axis(p.y, w.params.d);
    const double expect = std::acos(std::cos(v) * std::cos(h));
    CHECK(std::abs(angular_distance(f.to_sphere(px), w.center) - expect) < 1e-9);
  }
}

TEST_CASE("pixel round trip through the sphere") {
  Gen g(13);
  for (int i = 0; i < 5000; ++i) {
    WindowSpec w;
    w.center = canonical(g.uniform(-1.4, 1.4), g.uniform(-kPi, kPi));
    w.params.d = g.coin() ? 1.0 : g.uniform(0.0, 1.0);
    const double fov_cap = w.params.d == 0.0 ? 2.8 : kPi;
    w.params.fov_w = g.uniform(0.3, std::min(fov_cap, 2.0 * std::acos(-w.params.d) - 0.05));
    w.params.fov_h = g.uniform(0.3, std::min(fov_cap, 2.0 * std::acos(-w.params.d) - 0.05));
    w.out_w = g.integer(16, 1024);
    w.out_h = g.integer(16, 1024);
    // Rows at the top and bottom edge of a 180 degree window land on the
    // poles, where longitude is undefined; stay strictly inside.
    const PixelCoord px{g.uniform(0.5, w.out_w - 0.5), g.uniform(0.5, w.out_h - 0.5)};
    const SphereCoord s = window_to_sphere(w, px);
    const WindowHit hit = sphere_to_window(w, s);
    REQUIRE(hit.visible);
    CHECK(std::abs(hit.px.x - px.x) < 0.5);
    CHECK(std::abs(hit.px.y - px.y) < 0.5);
  }
}

TEST_CASE("default plan") {
  const auto plan = default_window_plan();
  REQUIRE(plan.size() == 4);
  for (std::size_t k = 0; k < plan.size(); ++k) {
    CHECK(plan[k].params.d == 1.0);
    CHECK(plan[k].params.fov_h == kPi);
    CHECK(plan[k].params.fov_w == kPi);
    CHECK(plan[k].center.lat == 0.0);
    CHECK(plan[k].out_w == 864);
    const double next = plan[(k + 1) % 4].center.lon;
    CHECK(std::abs(angular_distance({0.0, next}, {0.0, plan[k].center.lon}) - kHalfPi) < 1e-12);
  }
  const SphereCoord p{0.0, deg_to_rad(45.0)};
  CHECK_FALSE(sphere_to_window(plan[0], p).visible);
  CHECK_FALSE(sphere_to_window(plan[1], p).visible);
  CHECK(sphere_to_window(plan[2], p).visible);
  CHECK(sphere_to_window(plan[3], p).visible);
}

TEST_CASE("default plan covers a one degree grid") {
  const auto plan = default_window_plan();
  for (int lat = -90; lat <= 90; ++lat) {
    for (int lon = -180; lon < 180; ++lon) {
      const SphereCoord s = canonical(deg_to_rad(lat), deg_to_rad(lon));
      int n = 0;
      for (const auto& w : plan) n += sphere_to_window(w, s).visible ? 1 : 0;
      CHECK(n >= 1);
    }
  }
}

TEST_CASE("specs reject invalid parameters") {
  WindowSpec w;
  w.params.d = 0.0;
  CHECK_THROWS_AS(w.validate(), GeometryError);  // 180 degree perspective
  w.params.fov_w = w.params.fov_h = 1.5;
  CHECK_NOTHROW(w.validate());
  w.out_w = 1;
  CHECK_THROWS_AS(w.validate(), GeometryError);
  w.out_w = 64;
  w.params.d = 0.5;
  w.params.fov_w = kPi + 0.01;
  CHECK_THROWS_AS(w.validate(), GeometryError);
  w.center = {0.0, kPi};
  w.params.fov_w = 1.0;
  CHECK_THROWS_AS(w.validate(), GeometryError);
}
