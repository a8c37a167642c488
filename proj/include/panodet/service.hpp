#pragma once

// HTTP service backing the annotation tool: frame listing, live reprojection
// and per-frame annotation storage.
//
// Dataset root layout:
//   <root>/<id>.png                 equirectangular frame
//   <root>/<id>.annotations.json    {"frame": <frame JSON>, "version": n}
//
// Endpoints (JSON bodies, angles in degrees):
//   GET  /frames                      -> [{id, width, height, version}]
//   GET  /frames/{id}/image           -> PNG
//   POST /project                     {frame, lat, lon, fov_h, fov_w, d, out_w, out_h} -> PNG
//   POST /unproject                   {lat, lon, fov_h, fov_w, d, out_w, out_h, px, py} -> {lat, lon}
//   GET  /frames/{id}/annotations     -> frame JSON + "version"
//   PUT  /frames/{id}/annotations     frame JSON (+ optional "version") -> stored frame + new version
//   POST /convert/bfov-to-box         {label, lat, lon, dlat, dlon, width, height | frame} -> box
//
// Status codes: 400 schema violation, 404 unknown frame, 409 stale version.

#include <filesystem>
#include <memory>
#include <string>

#include "panodet/geometry.hpp"
#include "panodet/image.hpp"

namespace panodet {

class HttpService {
 public:
  explicit HttpService(std::filesystem::path root);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds host:port (port 0 picks a free one) and serves on a background
  /// thread. Returns the bound port.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Renders a view for the /project endpoint and the project command; both
/// produce identical bytes for identical parameters.
std::vector<std::uint8_t> render_view_png(const EraImage& era, const WindowSpec& spec);

}  // namespace panodet
