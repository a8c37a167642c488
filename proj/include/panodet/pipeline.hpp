#pragma once

// Multi-window detection: render sub-windows, run a detector on each, and map
// the window rectangles back onto the equirectangular frame.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "panodet/detection.hpp"
#include "panodet/geometry.hpp"
#include "panodet/image.hpp"
#include "panodet/resample.hpp"

namespace panodet {

class DetectorError : public std::runtime_error {
 public:
  enum class Kind { unavailable, malformed_output };

  DetectorError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A frame failed; carries every per-window error.
class FrameError : public std::runtime_error {
 public:
  explicit FrameError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

class DetectorPort {
 public:
  virtual ~DetectorPort() = default;

  virtual std::vector<WindowDetection> detect(const WindowImage& window, int window_index) = 0;

  /// Whether detect() may be called from several threads at once.
  virtual bool concurrent_safe() const noexcept { return false; }
};

/// Runs the detector, rejects scores outside [0, 1] and clips rectangles to
/// the raster. Rectangles with no area left after clipping are dropped.
std::vector<WindowDetection> detect_window(DetectorPort& detector, const WindowImage& win,
                                           int window_index);

struct RealignParams {
  double sigma = 0.6;

  void validate() const;
};

struct MinFrame {
  EraBox frame;
  double center_dist = 0.0;
};

/// Maps the rectangle border (64 samples per edge) into the ERA frame and
/// returns its wrap-aware hull plus the normalized center distance.
MinFrame backproject_min_frame(const WindowDetection& wd, const WindowSpec& spec, ImageDims dims);

/// Shrinks both sides by exp(-d^2 / sigma) around the unchanged center.
EraBox realign(const EraBox& raw, double center_dist, const RealignParams& p, ImageDims dims);

double realign_factor(double center_dist, double sigma);

struct RunOptions {
  RenderOptions render;
  /// Process windows on separate threads when the detector allows it.
  bool parallel_windows = false;
};

std::vector<Detection> run_frame(const EraImage& era, std::span<const WindowSpec> plan,
                                 DetectorPort& detector, const RealignParams& p,
                                 const RunOptions& opts = {});

}  // namespace panodet
