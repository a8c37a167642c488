#include "panodet/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include "panodet/annotations.hpp"
#include "panodet/json_io.hpp"
#include "panodet/resample.hpp"

namespace panodet {

std::vector<std::uint8_t> render_view_png(const EraImage& era, const WindowSpec& spec) {
  return encode_png(render_window(era, spec).raster);
}

namespace {

namespace fs = std::filesystem;

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

bool valid_frame_id(const std::string& id) {
  static const std::regex pattern("[A-Za-z0-9_][A-Za-z0-9_.-]*");
  return std::regex_match(id, pattern) && id.find("..") == std::string::npos;
}

void reply_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  try {
    return parse_json_text(req.body, "request body");
  } catch (const SchemaError& e) {
    throw HttpError(400, e.what());
  }
}

}  // namespace

struct HttpService::Impl {
  fs::path root;
  httplib::Server server;
  std::thread worker;

  std::mutex cache_mu;
  std::map<std::string, std::shared_ptr<const EraImage>> images;
  std::map<std::string, std::shared_ptr<std::mutex>> frame_locks;

  explicit Impl(fs::path r) : root(std::move(r)) { routes(); }

  fs::path image_path(const std::string& id) const { return root / (id + ".png"); }
  fs::path annotation_path(const std::string& id) const { return root / (id + ".annotations.json"); }

  void require_frame(const std::string& id) const {
    if (!valid_frame_id(id) || !fs::exists(image_path(id))) {
      throw HttpError(404, "unknown frame '" + id + "'");
    }
  }

  std::shared_ptr<const EraImage> image(const std::string& id) {
    require_frame(id);
    {
      std::lock_guard lock(cache_mu);
      if (auto it = images.find(id); it != images.end()) return it->second;
    }
    auto img = std::make_shared<const EraImage>(read_image(image_path(id)));
    std::lock_guard lock(cache_mu);
    return images.emplace(id, std::move(img)).first->second;
  }

  std::shared_ptr<std::mutex> frame_lock(const std::string& id) {
    std::lock_guard lock(cache_mu);
    auto& m = frame_locks[id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
  }

  // Caller holds the frame lock.
  std::pair<FrameAnnotations, int> load_annotations(const std::string& id) {
    const fs::path p = annotation_path(id);
    if (!fs::exists(p)) {
      FrameAnnotations f;
      f.id = id;
      f.dims = read_image_dims(image_path(id));
      return {f, 0};
    }
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    const json doc = parse_json_text(ss.str(), p.string());
    const JsonCursor c(doc, "");
    return {frame_from_json(c.at("frame")), c.at("version").integer()};
  }

  void store_annotations(const FrameAnnotations& f, int version) {
    const fs::path p = annotation_path(f.id);
    const fs::path tmp = p.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << json{{"frame", frame_to_json(f)}, {"version", version}}.dump(2) << "\n";
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, p);
  }

  json frame_listing() {
    json out = json::array();
    std::vector<std::string> ids;
    if (fs::is_directory(root)) {
      for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.path().extension() != ".png") continue;
        const std::string id = entry.path().stem().string();
        if (valid_frame_id(id)) ids.push_back(id);
      }
    }
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
      const ImageDims dims = read_image_dims(image_path(id));
      auto lock_ptr = frame_lock(id);
      std::lock_guard lock(*lock_ptr);
      const int version = load_annotations(id).second;
      out.push_back({{"id", id}, {"width", dims.width}, {"height", dims.height}, {"version", version}});
    }
    return out;
  }

  template <class F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const HttpError& e) {
        reply_json(res, {{"error", e.what()}}, e.status());
      } catch (const SchemaError& e) {
        reply_json(res, {{"error", e.what()}}, 400);
      } catch (const GeometryError& e) {
        reply_json(res, {{"error", e.what()}}, 400);
      } catch (const std::exception& e) {
        reply_json(res, {{"error", e.what()}}, 500);
      }
    };
  }

  void routes() {
    server.Get("/frames", guarded([this](const httplib::Request&, httplib::Response& res) {
      reply_json(res, frame_listing());
    }));

    server.Get(R"(/frames/([^/]+)/image)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      require_frame(id);
      const auto bytes = read_file_bytes(image_path(id));
      res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    }));

    server.Post("/project", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const JsonCursor c(body, "");
      const std::string id = c.at("frame").string();
      const WindowSpec spec = window_spec_from_json(c);
      const auto bytes = render_view_png(*image(id), spec);
      res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
    }));

    server.Post("/unproject", guarded([](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const JsonCursor c(body, "");
      const WindowSpec spec = window_spec_from_json(c);
      const PixelCoord px{c.at("px").number(), c.at("py").number()};
      if (px.x < 0.0 || px.x > spec.out_w || px.y < 0.0 || px.y > spec.out_h) {
        c.fail("pixel outside the view raster");
      }
      const SphereCoord s = window_to_sphere(spec, px);
      reply_json(res, {{"lat", rad_to_deg(s.lat)}, {"lon", rad_to_deg(s.lon)}});
    }));

    server.Get(R"(/frames/([^/]+)/annotations)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      require_frame(id);
      auto lock_ptr = frame_lock(id);
      std::lock_guard lock(*lock_ptr);
      const auto [frame, version] = load_annotations(id);
      json out = frame_to_json(frame);
      out["version"] = version;
      reply_json(res, out);
    }));

    server.Put(R"(/frames/([^/]+)/annotations)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      require_frame(id);
      json body = parse_body(req);
      if (!body.is_object()) throw HttpError(400, "expected a JSON object");
      if (body.contains("id") && body["id"] != id) throw HttpError(400, "/id: does not match the URL");
      body["id"] = id;
      const JsonCursor c(body, "");
      FrameAnnotations incoming = frame_from_json(c);
      const ImageDims dims = read_image_dims(image_path(id));
      if (!(incoming.dims == dims)) throw HttpError(400, "/width: frame dimensions do not match the image");

      auto lock_ptr = frame_lock(id);
      std::lock_guard lock(*lock_ptr);
      const int current = load_annotations(id).second;
      if (c.has("version") && c.at("version").integer() != current) {
        reply_json(res, {{"error", "stale version"}, {"version", current}}, 409);
        return;
      }
      store_annotations(incoming, current + 1);
      json out = frame_to_json(incoming);
      out["version"] = current + 1;
      reply_json(res, out);
    }));

    server.Post("/convert/bfov-to-box", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const JsonCursor c(body, "");
      ImageDims dims;
      if (c.has("frame")) {
        const std::string id = c.at("frame").string();
        require_frame(id);
        dims = read_image_dims(image_path(id));
      } else {
        dims = {c.at("width").integer(), c.at("height").integer()};
      }
      try {
        validate_era_dims(dims);
      } catch (const ImageError& e) {
        throw HttpError(400, e.what());
      }
      Bfov b;
      b.label = c.has("label") ? c.at("label").string() : std::string();
      const double lat = c.at("lat").number();
      if (lat < -90.0 || lat > 90.0) c.at("lat").fail("latitude outside [-90, 90]");
      b.center = canonical(deg_to_rad(lat), deg_to_rad(c.at("lon").number()));
      b.extent_lat = deg_to_rad(c.at("dlat").number());
      b.extent_lon = deg_to_rad(c.at("dlon").number());
      const EraBox box = bfov_to_erabox(b, dims);
      json out = era_box_fields(box);
      out["label"] = box.label;
      reply_json(res, out);
    }));
  }
};

HttpService::HttpService(std::filesystem::path root) : impl_(std::make_unique<Impl>(std::move(root))) {}

HttpService::~HttpService() { stop(); }

int HttpService::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpService::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void HttpService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace panodet
