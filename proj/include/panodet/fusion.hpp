#pragma once

// Cross-window box selection. Boxes live on the ERA cylinder, so every
// overlap is computed with longitude taken modulo the frame width.

#include <span>
#include <string>
#include <vector>

#include "panodet/annotations.hpp"
#include "panodet/detection.hpp"

namespace panodet {

struct FusionParams {
  double nms_iou = 0.3;
  /// Overlap penalty.
  double sigma1 = 0.3;
  /// Center-distance penalty.
  double sigma2 = 0.6;
  /// Soft-selected boxes whose running score drops below this are removed.
  double score_floor = 0.001;

  void validate() const;
};

enum class FusionMode { soft, nms };

FusionMode parse_fusion_mode(const std::string& s);
std::string_view to_string(FusionMode m) noexcept;

/// Intersection over union on the cylinder of circumference dims.width.
double iou(const EraBox& a, const EraBox& b, ImageDims dims);

/// Greedy per-label NMS: keeps boxes in (score desc, center_dist asc,
/// window asc) order, suppressing any box with IoU > thr against a kept one.
std::vector<Detection> nms(std::span<const Detection> dets, double thr, ImageDims dims);

/// exp(-(iou^2 / sigma1 + d^2 / sigma2))
double soft_factor(double overlap, double center_dist, double sigma1, double sigma2);

/// Per label: visit candidates nearest to their window center first; each
/// visited box keeps its running score and multiplies every later candidate
/// by soft_factor(IoU with it, that candidate's own center_dist). Nothing is
/// removed except boxes falling below score_floor.
std::vector<Detection> soft_select(std::span<const Detection> dets, const FusionParams& p,
                                   ImageDims dims);

/// Per-window NMS, then soft_select (soft) or a global NMS pass (nms).
/// Output is sorted by score, descending.
std::vector<Detection> fuse(std::span<const Detection> dets, const FusionParams& p,
                            FusionMode mode, ImageDims dims);

}  // namespace panodet
