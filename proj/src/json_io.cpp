#include "panodet/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace panodet {

bool JsonCursor::has(const char* key) const {
  return node_->is_object() && node_->contains(key);
}

JsonCursor JsonCursor::at(const char* key) const {
  if (!node_->is_object()) fail("expected an object");
  auto it = node_->find(key);
  if (it == node_->end()) fail(std::string("missing field '") + key + "'");
  return {*it, path_ + "/" + key};
}

JsonCursor JsonCursor::at(std::size_t index) const {
  if (!node_->is_array() || index >= node_->size()) fail("index out of range");
  return {(*node_)[index], path_ + "/" + std::to_string(index)};
}

std::size_t JsonCursor::array_size() const {
  if (!node_->is_array()) fail("expected an array");
  return node_->size();
}

std::string JsonCursor::string() const {
  if (!node_->is_string()) fail("expected a string");
  return node_->get<std::string>();
}

double JsonCursor::number() const {
  if (!node_->is_number()) fail("expected a number");
  const double v = node_->get<double>();
  if (!std::isfinite(v)) fail("expected a finite number");
  return v;
}

int JsonCursor::integer() const {
  if (!node_->is_number_integer()) fail("expected an integer");
  return node_->get<int>();
}

bool JsonCursor::boolean() const {
  if (!node_->is_boolean()) fail("expected a boolean");
  return node_->get<bool>();
}

void JsonCursor::fail(const std::string& what) const {
  throw SchemaError((path_.empty() ? std::string("/") : path_) + ": " + what);
}

json parse_json_text(const std::string& text, const std::string& source_name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n');
    const auto nl = text.rfind('\n', at == 0 ? 0 : at - 1);
    const auto col = nl == std::string::npos ? at + 1 : at - nl;
    throw SchemaError(source_name + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": malformed JSON (" + e.what() + ")");
  }
}

json era_box_fields(const EraBox& b) {
  return {{"cx", b.cx}, {"cy", b.cy}, {"w", b.w}, {"h", b.h}, {"wraps", b.wraps}};
}

EraBox era_box_from_fields(const JsonCursor& c, std::string label) {
  EraBox b;
  b.label = std::move(label);
  b.cx = c.at("cx").number();
  b.cy = c.at("cy").number();
  b.w = c.at("w").number();
  b.h = c.at("h").number();
  b.wraps = c.at("wraps").boolean();
  if (!(b.w > 0.0)) c.at("w").fail("box width must be positive");
  if (!(b.h > 0.0)) c.at("h").fail("box height must be positive");
  return b;
}

namespace {

void check_box_in_frame(const JsonCursor& c, const EraBox& b, ImageDims dims) {
  if (b.cx < 0.0 || b.cx >= dims.width) c.at("cx").fail("cx outside [0, width)");
  if (b.cy < 0.0 || b.cy > dims.height) c.at("cy").fail("cy outside [0, height]");
  if (b.w > dims.width) c.at("w").fail("box wider than the frame");
  if (b.h > dims.height) c.at("h").fail("box taller than the frame");
}

json object_to_json(const GroundTruth& gt) {
  json o;
  o["label"] = gt.label();
  o["source"] = std::string(to_string(gt.source));
  if (const auto* b = std::get_if<Bfov>(&gt.shape)) {
    o["kind"] = "bfov";
    o["bfov"] = {{"lat", degrees_for_output(b->center.lat)},
                 {"lon", degrees_for_output(b->center.lon)},
                 {"dlat", degrees_for_output(b->extent_lat)},
                 {"dlon", degrees_for_output(b->extent_lon)}};
  } else {
    o["kind"] = "box";
    o["box"] = era_box_fields(std::get<EraBox>(gt.shape));
  }
  return o;
}

GroundTruth object_from_json(const JsonCursor& c, ImageDims dims) {
  GroundTruth gt;
  const std::string label = c.at("label").string();
  if (label.empty()) c.at("label").fail("empty label");
  const std::string source = c.at("source").string();
  if (source == "bfov-derived") {
    gt.source = EntrySource::bfov_derived;
  } else if (source == "corrected") {
    gt.source = EntrySource::corrected;
  } else {
    c.at("source").fail("expected \"bfov-derived\" or \"corrected\"");
  }
  const std::string kind = c.at("kind").string();
  if (kind == "bfov") {
    const JsonCursor bc = c.at("bfov");
    const double lat = bc.at("lat").number();
    if (lat < -90.0 || lat > 90.0) bc.at("lat").fail("latitude outside [-90, 90]");
    Bfov b;
    b.label = label;
    b.center = canonical(deg_to_rad(lat), deg_to_rad(bc.at("lon").number()));
    b.extent_lat = deg_to_rad(bc.at("dlat").number());
    b.extent_lon = deg_to_rad(bc.at("dlon").number());
    if (!(b.extent_lat > 0.0) || b.extent_lat > kPi) bc.at("dlat").fail("extent outside (0, 180]");
    if (!(b.extent_lon > 0.0) || b.extent_lon > kPi) bc.at("dlon").fail("extent outside (0, 180]");
    gt.shape = b;
  } else if (kind == "box") {
    const JsonCursor bc = c.at("box");
    EraBox b = era_box_from_fields(bc, label);
    check_box_in_frame(bc, b, dims);
    gt.shape = b;
  } else {
    c.at("kind").fail("expected \"bfov\" or \"box\"");
  }
  return gt;
}

}  // namespace

json frame_to_json(const FrameAnnotations& f) {
  json objects = json::array();
  for (const auto& gt : f.objects) objects.push_back(object_to_json(gt));
  return {{"id", f.id}, {"width", f.dims.width}, {"height", f.dims.height}, {"objects", objects}};
}

FrameAnnotations frame_from_json(const JsonCursor& c) {
  FrameAnnotations f;
  f.id = c.at("id").string();
  f.dims = {c.at("width").integer(), c.at("height").integer()};
  try {
    validate_era_dims(f.dims);
  } catch (const ImageError& e) {
    c.at("width").fail(e.what());
  }
  const JsonCursor objs = c.at("objects");
  for (std::size_t i = 0; i < objs.array_size(); ++i) {
    f.objects.push_back(object_from_json(objs.at(i), f.dims));
  }
  return f;
}

Dataset parse_dataset_text(const std::string& text) {
  const json doc = parse_json_text(text, "dataset");
  const JsonCursor root(doc, "");
  Dataset ds;
  if (root.has("classes")) {
    const JsonCursor cls = root.at("classes");
    for (std::size_t i = 0; i < cls.array_size(); ++i) ds.classes.push_back(cls.at(i).string());
  }
  const JsonCursor frames = root.at("frames");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < frames.array_size(); ++i) {
    const JsonCursor fc = frames.at(i);
    FrameAnnotations f = frame_from_json(fc);
    if (!ids.insert(f.id).second) fc.at("id").fail("duplicate frame id '" + f.id + "'");
    if (!ds.classes.empty()) {
      for (std::size_t k = 0; k < f.objects.size(); ++k) {
        const auto& label = f.objects[k].label();
        if (std::find(ds.classes.begin(), ds.classes.end(), label) == ds.classes.end()) {
          ds.warnings.push_back(fc.path() + "/objects/" + std::to_string(k) + ": label '" + label +
                                "' is not in the class vocabulary");
        }
      }
    }
    ds.frames.push_back(std::move(f));
  }
  return ds;
}

Dataset parse_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open dataset " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_dataset_text(ss.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string write_dataset_text(const Dataset& ds) {
  json doc;
  if (!ds.classes.empty()) doc["classes"] = ds.classes;
  json frames = json::array();
  for (const auto& f : ds.frames) frames.push_back(frame_to_json(f));
  doc["frames"] = frames;
  return doc.dump(2) + "\n";
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw SchemaError("cannot write dataset " + path.string());
  out << write_dataset_text(ds);
}

json window_spec_to_json(const WindowSpec& w) {
  return {{"lat", degrees_for_output(w.center.lat)},
          {"lon", degrees_for_output(w.center.lon)},
          {"d", w.params.d},
          {"fov_h", degrees_for_output(w.params.fov_h)},
          {"fov_w", degrees_for_output(w.params.fov_w)},
          {"out_w", w.out_w},
          {"out_h", w.out_h}};
}

WindowSpec window_spec_from_json(const JsonCursor& c) {
  WindowSpec w;
  const double lat = c.at("lat").number();
  if (lat < -90.0 || lat > 90.0) c.at("lat").fail("latitude outside [-90, 90]");
  w.center = canonical(deg_to_rad(lat), deg_to_rad(c.at("lon").number()));
  w.params.d = c.at("d").number();
  w.params.fov_h = deg_to_rad(c.at("fov_h").number());
  w.params.fov_w = deg_to_rad(c.at("fov_w").number());
  w.out_w = c.at("out_w").integer();
  w.out_h = c.at("out_h").integer();
  try {
    w.validate();
  } catch (const GeometryError& e) {
    c.fail(e.what());
  }
  return w;
}

json plan_to_json(const std::vector<WindowSpec>& plan) {
  json windows = json::array();
  for (const auto& w : plan) windows.push_back(window_spec_to_json(w));
  return {{"windows", windows}};
}

std::vector<WindowSpec> plan_from_json(const JsonCursor& c) {
  std::vector<WindowSpec> plan;
  const JsonCursor ws = c.at("windows");
  for (std::size_t i = 0; i < ws.array_size(); ++i) plan.push_back(window_spec_from_json(ws.at(i)));
  if (plan.empty()) c.at("windows").fail("plan has no windows");
  return plan;
}

std::vector<WindowSpec> read_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open plan " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const json doc = parse_json_text(ss.str(), path);
  try {
    return plan_from_json(JsonCursor(doc, ""));
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

}  // namespace panodet
