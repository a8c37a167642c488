#pragma once

// Job configuration shared by the CLI commands. A JSON config file provides
// defaults and command-line flags override individual fields.
//
// {
//   "image": "frame.png", "images_dir": "frames/", "dataset": "gt.json",
//   "detections": "dets.json", "plan": "plan.json", "out": "out/",
//   "detector": "stub | stub:<file> | oracle | exec:<program> [args]",
//   "mode": "soft | nms",
//   "realign": {"sigma": 0.6},
//   "fusion": {"nms_iou": 0.3, "sigma1": 0.3, "sigma2": 0.6, "score_floor": 0.001},
//   "eval": {"iou_thresholds": [0.5, 0.4], "classes": ["person", ...]}
// }
//
// Relative paths in a config file resolve against the file's directory.

#include <filesystem>
#include <string>
#include <vector>

#include "panodet/evaluation.hpp"
#include "panodet/fusion.hpp"
#include "panodet/geometry.hpp"
#include "panodet/json_io.hpp"
#include "panodet/pipeline.hpp"

namespace panodet {

struct JobConfig {
  std::filesystem::path image;
  std::filesystem::path images_dir;
  std::filesystem::path dataset;
  std::filesystem::path detections;
  std::filesystem::path plan;
  std::filesystem::path out;
  std::string detector = "stub";
  FusionMode mode = FusionMode::soft;
  RealignParams realign;
  FusionParams fusion;
  EvalConfig eval;

  /// Checks parameter ranges and that every referenced input path exists.
  void validate() const;

  /// The plan file when set, the default four-window plan otherwise.
  std::vector<WindowSpec> window_plan() const;
};

JobConfig job_config_from_json(const JsonCursor& c, const std::filesystem::path& base_dir);
JobConfig read_job_config(const std::filesystem::path& path);

}  // namespace panodet
