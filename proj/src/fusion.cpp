#include "panodet/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace panodet {

namespace {

auto geometry_key(const Detection& d) {
  return std::tie(d.box.cx, d.box.cy, d.box.w, d.box.h);
}

bool score_order(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.center_dist != b.center_dist) return a.center_dist < b.center_dist;
  if (a.window_index != b.window_index) return a.window_index < b.window_index;
  return geometry_key(a) < geometry_key(b);
}

bool distance_order(const Detection& a, const Detection& b) {
  if (a.center_dist != b.center_dist) return a.center_dist < b.center_dist;
  if (a.score != b.score) return a.score > b.score;
  if (a.window_index != b.window_index) return a.window_index < b.window_index;
  return geometry_key(a) < geometry_key(b);
}

std::map<std::string, std::vector<Detection>> by_label(std::span<const Detection> dets) {
  std::map<std::string, std::vector<Detection>> groups;
  for (const auto& d : dets) groups[d.label].push_back(d);
  return groups;
}

double linear_overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

void FusionParams::validate() const {
  if (!(nms_iou > 0.0 && nms_iou < 1.0)) throw std::invalid_argument("nms_iou must lie in (0, 1)");
  if (!(sigma1 > 0.0)) throw std::invalid_argument("sigma1 must be positive");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  if (!(score_floor >= 0.0 && score_floor < 1.0)) {
    throw std::invalid_argument("score_floor must lie in [0, 1)");
  }
}

FusionMode parse_fusion_mode(const std::string& s) {
  if (s == "soft") return FusionMode::soft;
  if (s == "nms") return FusionMode::nms;
  throw std::invalid_argument("fusion mode must be 'soft' or 'nms', got '" + s + "'");
}

std::string_view to_string(FusionMode m) noexcept {
  return m == FusionMode::soft ? "soft" : "nms";
}

double iou(const EraBox& a, const EraBox& b, ImageDims dims) {
  const double width = dims.width;
  const double ih = linear_overlap(a.top(), a.bottom(), b.top(), b.bottom());
  if (ih <= 0.0) return 0.0;
  // Both left edges sit in [-width/2, width); shifting b by whole turns
  // covers every way the two arcs can meet on the cylinder.
  double iw = 0.0;
  for (int k = -2; k <= 2; ++k) {
    const double shift = k * width;
    iw += linear_overlap(a.left(), a.right(), b.left() + shift, b.right() + shift);
  }
  iw = std::min({iw, a.w, b.w});
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

std::vector<Detection> nms(std::span<const Detection> dets, double thr, ImageDims dims) {
  std::vector<Detection> kept;
  for (auto& [label, group] : by_label(dets)) {
    std::sort(group.begin(), group.end(), score_order);
    const std::size_t first = kept.size();
    for (auto& cand : group) {
      bool suppressed = false;
      for (std::size_t k = first; k < kept.size() && !suppressed; ++k) {
        suppressed = iou(kept[k].box, cand.box, dims) > thr;
      }
      if (!suppressed) kept.push_back(std::move(cand));
    }
  }
  std::stable_sort(kept.begin(), kept.end(), score_order);
  return kept;
}

double soft_factor(double overlap, double center_dist, double sigma1, double sigma2) {
  return std::exp(-(overlap * overlap / sigma1 + center_dist * center_dist / sigma2));
}

std::vector<Detection> soft_select(std::span<const Detection> dets, const FusionParams& p,
                                   ImageDims dims) {
  p.validate();
  std::vector<Detection> out;
  for (auto& [label, group] : by_label(dets)) {
    std::sort(group.begin(), group.end(), distance_order);
    std::vector<bool> alive(group.size(), true);
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (!alive[i]) continue;
      const Detection& anchor = group[i];
      out.push_back(anchor);
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        if (!alive[j]) continue;
        Detection& cand = group[j];
        cand.score *= soft_factor(iou(anchor.box, cand.box, dims), cand.center_dist, p.sigma1, p.sigma2);
        if (cand.score < p.score_floor) alive[j] = false;
      }
    }
  }
  return out;
}

std::vector<Detection> fuse(std::span<const Detection> dets, const FusionParams& p,
                            FusionMode mode, ImageDims dims) {
  p.validate();
  std::map<int, std::vector<Detection>> windows;
  for (const auto& d : dets) windows[d.window_index].push_back(d);

  std::vector<Detection> survivors;
  for (const auto& [index, group] : windows) {
    auto kept = nms(group, p.nms_iou, dims);
    survivors.insert(survivors.end(), kept.begin(), kept.end());
  }

  std::vector<Detection> out =
      mode == FusionMode::soft ? soft_select(survivors, p, dims) : nms(survivors, p.nms_iou, dims);
  std::stable_sort(out.begin(), out.end(), score_order);
  return out;
}

}  // namespace panodet
