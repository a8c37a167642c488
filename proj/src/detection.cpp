#include "panodet/detection.hpp"

#include <fstream>
#include <sstream>

#include "panodet/json_io.hpp"

namespace panodet {

const DetectionFrame* DetectionSet::find(const std::string& id) const {
  for (const auto& f : frames) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

std::string write_detections_text(const DetectionSet& set) {
  json frames = json::array();
  for (const auto& f : set.frames) {
    json dets = json::array();
    for (const auto& d : f.detections) {
      dets.push_back({{"label", d.label},
                      {"box", era_box_fields(d.box)},
                      {"score", d.score},
                      {"window", d.window_index},
                      {"center_dist", d.center_dist}});
    }
    frames.push_back({{"id", f.id}, {"width", f.dims.width}, {"height", f.dims.height},
                      {"detections", dets}});
  }
  return json{{"frames", frames}}.dump(2) + "\n";
}

DetectionSet parse_detections_text(const std::string& text) {
  const json doc = parse_json_text(text, "detections");
  const JsonCursor root(doc, "");
  DetectionSet set;
  const JsonCursor frames = root.at("frames");
  for (std::size_t i = 0; i < frames.array_size(); ++i) {
    const JsonCursor fc = frames.at(i);
    DetectionFrame f;
    f.id = fc.at("id").string();
    f.dims = {fc.at("width").integer(), fc.at("height").integer()};
    try {
      validate_era_dims(f.dims);
    } catch (const ImageError& e) {
      fc.at("width").fail(e.what());
    }
    const JsonCursor dets = fc.at("detections");
    for (std::size_t k = 0; k < dets.array_size(); ++k) {
      const JsonCursor dc = dets.at(k);
      Detection d;
      d.label = dc.at("label").string();
      d.box = era_box_from_fields(dc.at("box"), d.label);
      d.score = dc.at("score").number();
      if (d.score < 0.0 || d.score > 1.0) dc.at("score").fail("score outside [0, 1]");
      d.window_index = dc.at("window").integer();
      d.center_dist = dc.has("center_dist") ? dc.at("center_dist").number() : 0.0;
      if (d.center_dist < 0.0 || d.center_dist > 1.0) {
        dc.at("center_dist").fail("center distance outside [0, 1]");
      }
      f.detections.push_back(std::move(d));
    }
    set.frames.push_back(std::move(f));
  }
  return set;
}

DetectionSet read_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open detections " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_detections_text(ss.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_detections(const std::filesystem::path& path, const DetectionSet& set) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw SchemaError("cannot write detections " + path.string());
  out << write_detections_text(set);
}

}  // namespace panodet
