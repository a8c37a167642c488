#include "panodet/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "panodet/fusion.hpp"

namespace panodet {

void EvalConfig::validate() const {
  if (iou_thresholds.empty()) throw std::invalid_argument("no IoU thresholds given");
  for (double t : iou_thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("IoU thresholds must lie in (0, 1)");
  }
}

const ClassResult* ApReport::find(const std::string& label) const {
  for (const auto& c : classes) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

std::vector<bool> match_frame(std::span<const Detection> dets, std::span<const EraBox> gts,
                              ImageDims dims, double thr) {
  std::vector<bool> matched(gts.size(), false);
  std::vector<bool> tp(dets.size(), false);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    double best = -1.0;
    std::size_t best_j = gts.size();
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (matched[j] || gts[j].label != dets[i].label) continue;
      const double o = iou(dets[i].box, gts[j], dims);
      if (o >= thr && o > best) {
        best = o;
        best_j = j;
      }
    }
    if (best_j < gts.size()) {
      matched[best_j] = true;
      tp[i] = true;
    }
  }
  return tp;
}

std::vector<PrPoint> pr_curve(const std::vector<bool>& tp, std::span<const double> scores, int gt_count) {
  std::vector<std::size_t> order(tp.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<PrPoint> curve;
  curve.reserve(order.size());
  int ctp = 0;
  int cfp = 0;
  for (std::size_t k : order) {
    tp[k] ? ++ctp : ++cfp;
    curve.push_back({gt_count > 0 ? static_cast<double>(ctp) / gt_count : 0.0,
                     static_cast<double>(ctp) / (ctp + cfp)});
  }
  return curve;
}

double average_precision(const std::vector<bool>& tp, std::span<const double> scores, int gt_count) {
  if (gt_count <= 0) return 0.0;
  std::vector<std::size_t> order(tp.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  // Each true positive raises recall by 1 / gt_count, so the area is the sum
  // of envelope values at true-positive ranks over gt_count. Extended
  // precision keeps the single final rounding exact for small staircases.
  std::vector<long double> precision(order.size());
  long ctp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (tp[order[k]]) ++ctp;
    precision[k] = static_cast<long double>(ctp) / static_cast<long double>(k + 1);
  }
  long double running = 0.0L;
  long double area = 0.0L;
  for (std::size_t k = order.size(); k-- > 0;) {
    running = std::max(running, precision[k]);
    if (tp[order[k]]) area += running;
  }
  return std::clamp(static_cast<double>(area / gt_count), 0.0, 1.0);
}

namespace {

struct Scored {
  double score;
  const std::string* frame_id;
  std::size_t index;
  bool tp;
};

}  // namespace

std::vector<ApReport> evaluate(const Dataset& dataset, const DetectionSet& detections,
                               const EvalConfig& cfg) {
  cfg.validate();
  const std::vector<std::string>& vocab = cfg.classes.empty() ? dataset.classes : cfg.classes;
  auto in_vocab = [&](const std::string& label) {
    return vocab.empty() || std::find(vocab.begin(), vocab.end(), label) != vocab.end();
  };

  std::vector<std::string> warnings = dataset.warnings;
  for (const auto& df : detections.frames) {
    const FrameAnnotations* fa = dataset.find(df.id);
    if (fa == nullptr) throw EvaluationError("detections reference unknown frame '" + df.id + "'");
    if (!(fa->dims == df.dims)) {
      throw EvaluationError("frame '" + df.id + "' dimensions differ between detections and dataset");
    }
    for (const auto& d : df.detections) {
      if (!in_vocab(d.label)) {
        warnings.push_back("frame '" + df.id + "': detection label '" + d.label +
                           "' is not in the class vocabulary");
      }
    }
  }

  // Ground-truth boxes are threshold independent.
  std::map<std::string, std::vector<EraBox>> gt_boxes;
  std::map<std::string, int> gt_counts;
  for (const auto& fa : dataset.frames) {
    auto& boxes = gt_boxes[fa.id];
    for (const auto& gt : fa.objects) {
      boxes.push_back(ground_truth_box(gt, fa.dims));
      if (in_vocab(gt.label())) ++gt_counts[gt.label()];
    }
  }

  std::vector<ApReport> reports;
  for (double thr : cfg.iou_thresholds) {
    std::map<std::string, std::vector<Scored>> pooled;
    for (const auto& df : detections.frames) {
      std::vector<std::size_t> order(df.detections.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return df.detections[a].score > df.detections[b].score;
      });
      std::vector<Detection> sorted;
      for (std::size_t k : order) sorted.push_back(df.detections[k]);
      const auto flags = match_frame(sorted, gt_boxes.at(df.id), df.dims, thr);
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        pooled[sorted[k].label].push_back({sorted[k].score, &df.id, order[k], flags[k]});
      }
    }

    ApReport report;
    report.threshold = thr;
    report.warnings = warnings;
    for (const auto& [label, count] : gt_counts) {
      auto& list = pooled[label];
      std::sort(list.begin(), list.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        if (*a.frame_id != *b.frame_id) return *a.frame_id < *b.frame_id;
        return a.index < b.index;
      });
      std::vector<bool> tp;
      std::vector<double> scores;
      for (const auto& s : list) {
        tp.push_back(s.tp);
        scores.push_back(s.score);
      }

      ClassResult cr;
      cr.label = label;
      cr.gt_count = count;
      cr.tp = static_cast<int>(std::count(tp.begin(), tp.end(), true));
      cr.fp = static_cast<int>(tp.size()) - cr.tp;
      cr.fn = count - cr.tp;
      cr.ap = average_precision(tp, scores, count);
      cr.curve = pr_curve(tp, scores, count);
      report.classes.push_back(std::move(cr));
    }
    double sum = 0.0;
    for (const auto& c : report.classes) sum += c.ap;
    report.map = report.classes.empty() ? 0.0 : sum / static_cast<double>(report.classes.size());
    reports.push_back(std::move(report));
  }
  return reports;
}

std::string report_csv(std::span<const ApReport> reports) {
  std::string out = "class,threshold,AP,TP,FP,FN\n";
  for (const auto& r : reports) {
    int tp = 0, fp = 0, fn = 0;
    for (const auto& c : r.classes) {
      out += fmt::format("{},{:.2f},{:.2f},{},{},{}\n", c.label, r.threshold, 100.0 * c.ap, c.tp, c.fp, c.fn);
      tp += c.tp;
      fp += c.fp;
      fn += c.fn;
    }
    out += fmt::format("mAP,{:.2f},{:.2f},{},{},{}\n", r.threshold, 100.0 * r.map, tp, fp, fn);
  }
  return out;
}

std::string report_table(std::span<const NamedReports> rows) {
  std::set<double, std::greater<>> thresholds;
  std::set<std::string> labels;
  std::size_t name_width = 8;
  for (const auto& row : rows) {
    name_width = std::max(name_width, row.name.size());
    for (const auto& r : row.reports) {
      thresholds.insert(r.threshold);
      for (const auto& c : r.classes) labels.insert(c.label);
    }
  }
  std::string out;
  for (double thr : thresholds) {
    out += fmt::format("{:<{}}", fmt::format("AP @ {:.2g}", thr), name_width);
    for (const auto& l : labels) out += fmt::format(" {:>8}", l);
    out += fmt::format(" {:>8}\n", "mAP");
    for (const auto& row : rows) {
      const ApReport* rep = nullptr;
      for (const auto& r : row.reports) {
        if (r.threshold == thr) rep = &r;
      }
      if (rep == nullptr) continue;
      out += fmt::format("{:<{}}", row.name, name_width);
      for (const auto& l : labels) {
        const ClassResult* c = rep->find(l);
        out += c ? fmt::format(" {:>8.2f}", 100.0 * c->ap) : fmt::format(" {:>8}", "-");
      }
      out += fmt::format(" {:>8.2f}\n", 100.0 * rep->map);
    }
    out += "\n";
  }
  return out;
}

}  // namespace panodet
