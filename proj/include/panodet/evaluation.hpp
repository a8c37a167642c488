#pragma once

// Pascal-VOC-style evaluation: greedy matching per frame and all-point
// interpolated average precision per class.

#include <span>
#include <string>
#include <vector>

#include "panodet/annotations.hpp"
#include "panodet/detection.hpp"

namespace panodet {

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalConfig {
  std::vector<double> iou_thresholds{0.5, 0.4};
  /// Class vocabulary; empty accepts every label.
  std::vector<std::string> classes;

  void validate() const;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct ClassResult {
  std::string label;
  double ap = 0.0;
  int gt_count = 0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<PrPoint> curve;
};

struct ApReport {
  double threshold = 0.5;
  /// Classes present in the ground truth, sorted by label.
  std::vector<ClassResult> classes;
  /// Unweighted mean of the per-class AP.
  double map = 0.0;
  std::vector<std::string> warnings;

  const ClassResult* find(const std::string& label) const;
};

/// dets must be sorted by score, descending. Each detection claims the
/// unmatched same-label ground truth with the highest IoU >= thr.
std::vector<bool> match_frame(std::span<const Detection> dets, std::span<const EraBox> gts,
                              ImageDims dims, double thr);

/// Precision/recall staircase after stable sorting by score, descending.
std::vector<PrPoint> pr_curve(const std::vector<bool>& tp, std::span<const double> scores, int gt_count);

/// Area under the monotone precision envelope over recall.
double average_precision(const std::vector<bool>& tp, std::span<const double> scores, int gt_count);

std::vector<ApReport> evaluate(const Dataset& dataset, const DetectionSet& detections,
                               const EvalConfig& cfg);

/// CSV rows: class,threshold,AP,TP,FP,FN (AP in percent), plus an mAP row.
std::string report_csv(std::span<const ApReport> reports);

/// Aligned grid with one row per named configuration and one column per
/// class, followed by mAP; one block per threshold.
struct NamedReports {
  std::string name;
  std::vector<ApReport> reports;
};
std::string report_table(std::span<const NamedReports> rows);

}  // namespace panodet
