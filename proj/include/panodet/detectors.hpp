#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "panodet/annotations.hpp"
#include "panodet/pipeline.hpp"

namespace panodet {

/// Returns fixed detections per window index.
class StubDetector final : public DetectorPort {
 public:
  StubDetector() = default;
  explicit StubDetector(std::map<int, std::vector<WindowDetection>> per_window)
      : per_window_(std::move(per_window)) {}

  /// {"windows": [[{label, score, x, y, w, h}, ...], ...]}
  static StubDetector from_json_text(const std::string& text);

  std::vector<WindowDetection> detect(const WindowImage& window, int window_index) override;
  bool concurrent_safe() const noexcept override { return true; }

 private:
  std::map<int, std::vector<WindowDetection>> per_window_;
};

/// Projects ground-truth objects into each window: every object whose center
/// is visible becomes one detection whose rectangle hulls the visible part of
/// the object's border.
class OracleDetector final : public DetectorPort {
 public:
  explicit OracleDetector(FrameAnnotations truth, double score = 1.0);

  std::vector<WindowDetection> detect(const WindowImage& window, int window_index) override;
  bool concurrent_safe() const noexcept override { return true; }

 private:
  FrameAnnotations truth_;
  double score_;
};

/// Center direction and sampled border of a ground-truth entry.
struct ObjectOutline {
  SphereCoord center;
  std::vector<SphereCoord> border;
};

ObjectOutline object_outline(const GroundTruth& gt, ImageDims dims);

/// Window rectangle covering the visible part of an outline, or nothing when
/// its center is not visible in the window.
std::optional<WindowRect> project_outline(const ObjectOutline& outline, const WindowSpec& spec);

/// Talks line-delimited JSON to a child process over its stdin/stdout.
/// Requests are serialized.
class ExternalProcessDetector final : public DetectorPort {
 public:
  explicit ExternalProcessDetector(std::vector<std::string> argv);
  ~ExternalProcessDetector() override;
  ExternalProcessDetector(const ExternalProcessDetector&) = delete;
  ExternalProcessDetector& operator=(const ExternalProcessDetector&) = delete;

  std::vector<WindowDetection> detect(const WindowImage& window, int window_index) override;

 private:
  void start();
  void stop() noexcept;
  std::string exchange(const std::string& line);

  std::vector<std::string> argv_;
  std::mutex mu_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string pending_;
  int next_id_ = 0;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

/// Request line for one window: {"id", "width", "height", "png_b64"}.
std::string detector_request_line(int id, const Raster& raster);
/// Parses {"id", "detections": [{label, score, x, y, w, h}]}.
std::vector<WindowDetection> parse_detector_response(const std::string& line, int expected_id);

/// "stub:<fixture.json>", "stub" (no detections), "oracle" (needs truth) or
/// "exec:<program> [args...]".
std::unique_ptr<DetectorPort> make_detector(const std::string& spec,
                                            const FrameAnnotations* truth = nullptr);

}  // namespace panodet
