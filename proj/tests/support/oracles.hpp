#pragma once

// Independent reference implementations used as test oracles.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <vector>

#include "panodet/detection.hpp"
#include "panodet/fusion.hpp"

namespace panodet::testing {

/// Counts unit cells covered by integer-aligned boxes on a cylinder of the
/// given width.
inline double cell_iou(int ax, int ay, int aw, int ah, int bx, int by, int bw, int bh, int width) {
  auto covered = [width](int x0, int w, int cx) {
    const int rel = ((cx - x0) % width + width) % width;
    return rel < w;
  };
  long inter = 0;
  for (int x = 0; x < width; ++x) {
    if (!covered(ax, aw, x) || !covered(bx, bw, x)) continue;
    const int lo = std::max(ay, by), hi = std::min(ay + ah, by + bh);
    inter += std::max(0, hi - lo);
  }
  const long uni = static_cast<long>(aw) * ah + static_cast<long>(bw) * bh - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Soft selection by direct expansion: for candidate j in (distance, -score,
/// window, geometry) order, its final score is s_j times the factor of every
/// earlier candidate of the same label that itself survived.
inline std::vector<Detection> soft_select_reference(const std::vector<Detection>& dets, const FusionParams& p,
                                                    ImageDims dims) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) {
    const Detection& d = dets[i];
    return std::make_tuple(d.label, d.center_dist, -d.score, d.window_index, d.box.cx, d.box.cy, d.box.w, d.box.h);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

  std::vector<double> final_score(dets.size());
  std::vector<bool> survived(dets.size(), false);
  for (std::size_t jj = 0; jj < order.size(); ++jj) {
    const std::size_t j = order[jj];
    double s = dets[j].score;
    bool alive = true;
    for (std::size_t ii = 0; ii < jj && alive; ++ii) {
      const std::size_t i = order[ii];
      if (!survived[i] || dets[i].label != dets[j].label) continue;
      const double o = iou(dets[i].box, dets[j].box, dims);
      const double dj = dets[j].center_dist;
      s *= std::exp(-(o * o / p.sigma1 + dj * dj / p.sigma2));
      alive = s >= p.score_floor;
    }
    final_score[j] = s;
    survived[j] = alive;
  }
  std::vector<Detection> out;
  for (std::size_t j : order) {
    if (!survived[j]) continue;
    out.push_back(dets[j]);
    out.back().score = final_score[j];
  }
  return out;
}

struct ApCase {
  std::vector<bool> tp;
  std::vector<double> scores;
  int gt_count = 0;
};

/// All-point AP by explicit enumeration: for every recall level reached,
/// take the best precision at any equal or higher recall and integrate the
/// resulting step function over recall.
/// Envelope integration in exact rational arithmetic: every precision is
/// tp / rank with rank <= 8, so 840 is a common denominator. The single
/// final division rounds correctly.
inline double average_precision_reference(const ApCase& c) {
  if (c.gt_count == 0) return 0.0;
  constexpr long kDen = 840;
  std::vector<std::size_t> idx(c.tp.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return c.scores[a] > c.scores[b]; });
  std::vector<long> rec_num, prec_num;
  long tp = 0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (c.tp[idx[r]]) ++tp;
    rec_num.push_back(tp);
    prec_num.push_back(tp * kDen / static_cast<long>(r + 1));
  }
  long area = 0;  // in units of 1 / (kDen * gt_count)
  long prev = 0;
  for (std::size_t k = 0; k < rec_num.size(); ++k) {
    if (rec_num[k] <= prev) continue;
    long best = 0;
    for (std::size_t m = k; m < rec_num.size(); ++m) best = std::max(best, prec_num[m]);
    area += (rec_num[k] - prev) * best;
    prev = rec_num[k];
  }
  return static_cast<double>(area) / static_cast<double>(kDen * c.gt_count);
}

}  // namespace panodet::testing
