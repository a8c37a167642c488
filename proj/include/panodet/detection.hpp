#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "panodet/annotations.hpp"
#include "panodet/image.hpp"

namespace panodet {

/// Rectangle in window raster pixels; (x, y) is the top-left corner.
struct WindowRect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  PixelCoord center() const noexcept { return {x + w / 2.0, y + h / 2.0}; }
  friend bool operator==(const WindowRect&, const WindowRect&) = default;
};

struct WindowDetection {
  std::string label;
  double score = 0.0;
  WindowRect rect;

  friend bool operator==(const WindowDetection&, const WindowDetection&) = default;
};

/// Detection back-projected to the ERA frame.
struct Detection {
  std::string label;
  double score = 0.0;
  EraBox box;
  int window_index = 0;
  /// Planar distance of the source rectangle center from its window center,
  /// normalized to [0, 1] by the center-to-corner distance.
  double center_dist = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct DetectionFrame {
  std::string id;
  ImageDims dims;
  std::vector<Detection> detections;

  friend bool operator==(const DetectionFrame&, const DetectionFrame&) = default;
};

struct DetectionSet {
  std::vector<DetectionFrame> frames;

  const DetectionFrame* find(const std::string& id) const;
};

// { "frames": [ { "id", "width", "height", "detections": [ { "label",
//   "box": {cx, cy, w, h, wraps}, "score", "window", "center_dist" } ] } ] }
std::string write_detections_text(const DetectionSet& set);
DetectionSet parse_detections_text(const std::string& text);
DetectionSet read_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path, const DetectionSet& set);

}  // namespace panodet
