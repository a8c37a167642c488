#include "panodet/job_config.hpp"

#include <fstream>
#include <sstream>

namespace panodet {

namespace {

namespace fs = std::filesystem;

fs::path path_field(const JsonCursor& c, const char* key, const fs::path& base) {
  if (!c.has(key)) return {};
  const fs::path p = c.at(key).string();
  return p.is_relative() && !base.empty() ? base / p : p;
}

void require_exists(const fs::path& p, const char* what) {
  if (!p.empty() && !fs::exists(p)) {
    throw SchemaError(std::string(what) + " not found: " + p.string());
  }
}

}  // namespace

void JobConfig::validate() const {
  require_exists(image, "image");
  require_exists(images_dir, "images directory");
  require_exists(dataset, "dataset");
  require_exists(detections, "detections");
  require_exists(plan, "plan");
  if (detector.rfind("stub:", 0) == 0) require_exists(detector.substr(5), "stub fixture");
  if (detector.rfind("exec:", 0) == 0) {
    std::istringstream words(detector.substr(5));
    std::string program;
    words >> program;
    if (program.empty()) throw SchemaError("exec detector needs a program");
    if (program.find('/') != std::string::npos) require_exists(program, "detector program");
  } else if (detector != "stub" && detector != "oracle" && detector.rfind("stub:", 0) != 0) {
    throw SchemaError("unknown detector '" + detector + "'");
  }
  realign.validate();
  fusion.validate();
  eval.validate();
}

std::vector<WindowSpec> JobConfig::window_plan() const {
  if (plan.empty()) return default_window_plan();
  return read_plan(plan.string());
}

JobConfig job_config_from_json(const JsonCursor& c, const fs::path& base_dir) {
  if (!c.node().is_object()) c.fail("expected an object");
  JobConfig cfg;
  cfg.image = path_field(c, "image", base_dir);
  cfg.images_dir = path_field(c, "images_dir", base_dir);
  cfg.dataset = path_field(c, "dataset", base_dir);
  cfg.detections = path_field(c, "detections", base_dir);
  cfg.plan = path_field(c, "plan", base_dir);
  cfg.out = path_field(c, "out", base_dir);
  if (c.has("detector")) cfg.detector = c.at("detector").string();
  if (c.has("mode")) {
    try {
      cfg.mode = parse_fusion_mode(c.at("mode").string());
    } catch (const std::invalid_argument& e) {
      c.at("mode").fail(e.what());
    }
  }
  if (c.has("realign")) {
    const JsonCursor r = c.at("realign");
    if (r.has("sigma")) cfg.realign.sigma = r.at("sigma").number();
  }
  if (c.has("fusion")) {
    const JsonCursor f = c.at("fusion");
    if (f.has("nms_iou")) cfg.fusion.nms_iou = f.at("nms_iou").number();
    if (f.has("sigma1")) cfg.fusion.sigma1 = f.at("sigma1").number();
    if (f.has("sigma2")) cfg.fusion.sigma2 = f.at("sigma2").number();
    if (f.has("score_floor")) cfg.fusion.score_floor = f.at("score_floor").number();
  }
  if (c.has("eval")) {
    const JsonCursor e = c.at("eval");
    if (e.has("iou_thresholds")) {
      cfg.eval.iou_thresholds.clear();
      const JsonCursor t = e.at("iou_thresholds");
      for (std::size_t i = 0; i < t.array_size(); ++i) cfg.eval.iou_thresholds.push_back(t.at(i).number());
    }
    if (e.has("classes")) {
      const JsonCursor k = e.at("classes");
      for (std::size_t i = 0; i < k.array_size(); ++i) cfg.eval.classes.push_back(k.at(i).string());
    }
  }
  return cfg;
}

JobConfig read_job_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const json doc = parse_json_text(ss.str(), path.string());
  try {
    return job_config_from_json(JsonCursor(doc, ""), path.parent_path());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace panodet
