#include "msast/metrics/segmental.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "msast/errors.hpp"

namespace msast::metrics {

double edit_score(std::span<const Segment> pred, std::span<const Segment> gt) {
  if (pred.empty() || gt.empty()) throw DataError("edit_score: empty segment list");
  const std::size_t n = pred.size();
  const std::size_t m = gt.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (pred[i - 1].label == gt[j - 1].label ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  const double dist = static_cast<double>(prev[m]);
  return 100.0 * (1.0 - dist / static_cast<double>(std::max(n, m)));
}

double edit_score(const LabelSequence& pred, const LabelSequence& gt) {
  const auto p = segments_from_labels(pred);
  const auto g = segments_from_labels(gt);
  return edit_score(p, g);
}

SegmentalCounts overlap_counts(const LabelSequence& pred, const LabelSequence& gt,
                               double threshold) {
  if (pred.size() != gt.size())
    throw DataError("f1_at_overlap: prediction has " + std::to_string(pred.size()) +
                    " frames, ground truth " + std::to_string(gt.size()));
  const auto ps = segments_from_labels(pred);
  const auto gs = segments_from_labels(gt);
  std::vector<bool> hit(gs.size(), false);
  SegmentalCounts c;
  for (const Segment& p : ps) {
    double best = 0.0;
    std::size_t best_idx = gs.size();
    for (std::size_t g = 0; g < gs.size(); ++g) {
      if (gs[g].label != p.label) continue;
      const std::size_t inter_lo = std::max(p.start, gs[g].start);
      const std::size_t inter_hi = std::min(p.end, gs[g].end);
      const std::size_t inter = inter_hi > inter_lo ? inter_hi - inter_lo : 0;
      const std::size_t uni = std::max(p.end, gs[g].end) - std::min(p.start, gs[g].start);
      const double iou = static_cast<double>(inter) / static_cast<double>(uni);
      if (best_idx == gs.size() || iou > best) {
        best = iou;
        best_idx = g;
      }
    }
    if (best_idx != gs.size() && best >= threshold && !hit[best_idx]) {
      ++c.tp;
      hit[best_idx] = true;
    } else {
      ++c.fp;
    }
  }
  c.fn = static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), false));
  return c;
}

F1Result f1_from_counts(const SegmentalCounts& c) {
  auto pct = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  // 2PR/(P+R) reduces to 2TP/(2TP+FP+FN); one rounding instead of four.
  return {pct(c.tp, c.tp + c.fp), pct(c.tp, c.tp + c.fn), pct(2 * c.tp, 2 * c.tp + c.fp + c.fn)};
}

F1Result f1_at_overlap(const LabelSequence& pred, const LabelSequence& gt, double threshold) {
  return f1_from_counts(overlap_counts(pred, gt, threshold));
}

double f1_avg(double f10, double f25, double f50) { return (f10 + f25 + f50) / 3.0; }

}  // namespace msast::metrics
