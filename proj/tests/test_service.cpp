#include <doctest.h>
#include <httplib.h>

#include <thread>

#include "panodet/json_io.hpp"
#include "panodet/service.hpp"
#include "support/random.hpp"
#include "support/scenes.hpp"
#include "support/tempdir.hpp"

using namespace panodet;
using panodet::testing::Gen;
using panodet::testing::TempDir;

namespace {

Raster gradient(int w, int h) {
  Raster r(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      r.at(x, y, 0) = static_cast<std::uint8_t>(x * 255 / (w - 1));
      r.at(x, y, 1) = static_cast<std::uint8_t>(y * 255 / (h - 1));
      r.at(x, y, 2) = 77;
    }
  return r;
}

struct Fixture {
  TempDir dir{"panodet-service"};
  HttpService svc{dir.path()};
  int port = svc.start("127.0.0.1", 0);
  httplib::Client client{"127.0.0.1", port};

  void add_frame(const std::string& id, const Raster& r) { write_image(dir.path() / (id + ".png"), r); }

  httplib::Result post(const std::string& path, const json& body) {
    return client.Post(path, body.dump(), "application/json");
  }
  httplib::Result put(const std::string& path, const json& body) {
    return client.Put(path, body.dump(), "application/json");
  }
};

json view(double lat, double lon, double fov, double d, int w, int h) {
  return {{"lat", lat}, {"lon", lon}, {"fov_h", fov}, {"fov_w", fov}, {"d", d}, {"out_w", w}, {"out_h", h}};
}

}  // namespace

TEST_CASE("service frame listing") {
  Fixture fx;
  auto res = fx.client.Get("/frames");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body) == json::array());

  fx.add_frame("b", gradient(64, 32));
  fx.add_frame("a", gradient(128, 64));
  res = fx.client.Get("/frames");
  REQUIRE(res);
  const json listing = json::parse(res->body);
  REQUIRE(listing.size() == 2);
  CHECK(listing[0]["id"] == "a");
  CHECK(listing[0]["width"] == 128);
  CHECK(listing[0]["version"] == 0);
  CHECK(listing[1]["id"] == "b");

  res = fx.client.Get("/frames/a/image");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "image/png");
  const auto bytes = read_file_bytes(fx.dir.path() / "a.png");
  CHECK(res->body == std::string(bytes.begin(), bytes.end()));

  CHECK(fx.client.Get("/frames/zzz/image")->status == 404);
  CHECK(fx.client.Get("/frames/..%2Fetc/image")->status == 404);
}

TEST_CASE("service projection matches the library renderer") {
  Fixture fx;
  Gen g(71);
  const Raster src = testing::smooth_scene(g, 512, 256, 3);
  fx.add_frame("scene", src);
  const EraImage era(src);

  json body = view(0, 0, 90, 0, 65, 65);
  body["frame"] = "scene";
  auto res = fx.post("/project", body);
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const WindowSpec spec = window_spec_from_json(JsonCursor(body, ""));
  const auto expected = render_view_png(era, spec);
  CHECK(res->body == std::string(expected.begin(), expected.end()));

  // The view center samples the ERA center, which falls between four pixels.
  const std::vector<std::uint8_t> got(res->body.begin(), res->body.end());
  const Raster out = decode_png(got);
  for (int c = 0; c < 3; ++c) {
    const int avg = (src.at(255, 127, c) + src.at(256, 127, c) + src.at(255, 128, c) + src.at(256, 128, c) + 2) / 4;
    CHECK(std::abs(out.at(32, 32, c) - avg) <= 1);
  }

  body["frame"] = "missing";
  CHECK(fx.post("/project", body)->status == 404);
  body["frame"] = "scene";
  body["fov_h"] = 200;
  CHECK(fx.post("/project", body)->status == 400);
  CHECK(fx.client.Post("/project", "{not json", "application/json")->status == 400);
}

TEST_CASE("service unprojection") {
  Fixture fx;
  json body = view(10, 20, 90, 1, 101, 101);
  body["px"] = 50.5;
  body["py"] = 50.5;
  auto res = fx.post("/unproject", body);
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const json out = json::parse(res->body);
  CHECK(out["lat"].get<double>() == doctest::Approx(10).epsilon(1e-9));
  CHECK(out["lon"].get<double>() == doctest::Approx(20).epsilon(1e-9));

  body["px"] = -1;
  CHECK(fx.post("/unproject", body)->status == 400);
  body.erase("px");
  CHECK(fx.post("/unproject", body)->status == 400);
}

TEST_CASE("service annotation storage") {
  Fixture fx;
  fx.add_frame("f1", gradient(64, 32));

  auto res = fx.client.Get("/frames/f1/annotations");
  REQUIRE(res);
  json doc = json::parse(res->body);
  CHECK(doc["version"] == 0);
  CHECK(doc["objects"] == json::array());
  CHECK(doc["width"] == 64);

  FrameAnnotations f{"f1", {64, 32}, {}};
  f.objects.push_back({Bfov{"person", {0.25, -1.5}, 0.3, 0.2}, EntrySource::bfov_derived});
  f.objects.push_back({make_era_box("car", 60, 10, 12, 6, f.dims), EntrySource::corrected});
  json put_body = frame_to_json(f);
  put_body["version"] = 0;
  res = fx.put("/frames/f1/annotations", put_body);
  REQUIRE(res);
  REQUIRE(res->status == 200);
  CHECK(json::parse(res->body)["version"] == 1);

  res = fx.client.Get("/frames/f1/annotations");
  doc = json::parse(res->body);
  CHECK(doc["version"] == 1);
  CHECK(frame_from_json(JsonCursor(doc, "")) == f);
  CHECK(json::parse(fx.client.Get("/frames")->body)[0]["version"] == 1);

  SUBCASE("stale version") {
    res = fx.put("/frames/f1/annotations", put_body);
    CHECK(res->status == 409);
    CHECK(json::parse(res->body)["version"] == 1);
  }
  SUBCASE("unversioned write wins") {
    put_body.erase("version");
    put_body["objects"] = json::array();
    res = fx.put("/frames/f1/annotations", put_body);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["version"] == 2);
  }
  SUBCASE("schema errors") {
    json bad = put_body;
    bad["version"] = 1;
    bad["objects"][0]["bfov"]["lat"] = 120;
    res = fx.put("/frames/f1/annotations", bad);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"].get<std::string>().find("/objects/0") != std::string::npos);
    bad = put_body;
    bad["id"] = "other";
    CHECK(fx.put("/frames/f1/annotations", bad)->status == 400);
    bad = put_body;
    bad["width"] = 128;
    bad["height"] = 64;
    CHECK(fx.put("/frames/f1/annotations", bad)->status == 400);
    CHECK(json::parse(fx.client.Get("/frames/f1/annotations")->body)["version"] == 1);
  }
  SUBCASE("unknown frame") {
    CHECK(fx.client.Get("/frames/nope/annotations")->status == 404);
    CHECK(fx.put("/frames/nope/annotations", put_body)->status == 404);
  }
}

TEST_CASE("service concurrent writers serialize") {
  Fixture fx;
  fx.add_frame("f", gradient(64, 32));
  const json body = frame_to_json(FrameAnnotations{"f", {64, 32}, {}});
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      httplib::Client c("127.0.0.1", fx.port);
      for (int i = 0; i < 5; ++i) {
        auto r = c.Put("/frames/f/annotations", body.dump(), "application/json");
        if (r && r->status == 200) ++ok;
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok == 40);
  CHECK(json::parse(fx.client.Get("/frames/f/annotations")->body)["version"] == 40);
}

TEST_CASE("service bfov conversion") {
  Fixture fx;
  fx.add_frame("f", gradient(3840, 1920));
  json body = {{"label", "person"}, {"lat", 0}, {"lon", 0}, {"dlat", 90}, {"dlon", 90}, {"width", 3840}, {"height", 1920}};
  auto res = fx.post("/convert/bfov-to-box", body);
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const json box = json::parse(res->body);
  CHECK(box["label"] == "person");
  CHECK(box["cx"].get<double>() == doctest::Approx(1920).epsilon(1e-9));
  CHECK(box["cy"].get<double>() == doctest::Approx(960).epsilon(1e-9));
  CHECK(box["w"].get<double>() == doctest::Approx(960).epsilon(1e-9));
  CHECK(box["h"].get<double>() == doctest::Approx(960).epsilon(1e-9));

  body.erase("width");
  body.erase("height");
  body["frame"] = "f";
  res = fx.post("/convert/bfov-to-box", body);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body) == box);

  body["frame"] = "nope";
  CHECK(fx.post("/convert/bfov-to-box", body)->status == 404);
  body.erase("frame");
  body["width"] = 100;
  body["height"] = 100;
  CHECK(fx.post("/convert/bfov-to-box", body)->status == 400);
}
