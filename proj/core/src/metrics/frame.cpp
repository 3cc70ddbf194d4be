#include "msast/metrics/frame.hpp"

#include <algorithm>
#include <string>

#include "msast/errors.hpp"

namespace msast::metrics {
namespace {

std::size_t resolve_classes(const LabelSequence& pred, const LabelSequence& gt,
                            std::size_t num_classes) {
  if (pred.size() != gt.size())
    throw DataError("prediction has " + std::to_string(pred.size()) + " frames, ground truth " +
                    std::to_string(gt.size()));
  std::uint32_t mx = 0;
  for (auto v : pred) mx = std::max(mx, v);
  for (auto v : gt) mx = std::max(mx, v);
  if (num_classes == 0) return pred.empty() && gt.empty() ? 0 : std::size_t{mx} + 1;
  if (!pred.empty() && mx >= num_classes)
    throw DataError("label " + std::to_string(mx) + " outside [0, " +
                    std::to_string(num_classes) + ")");
  return num_classes;
}

double percent(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

FrameCounts& FrameCounts::operator+=(const FrameCounts& o) {
  correct += o.correct;
  total += o.total;
  if (per_class.size() < o.per_class.size()) per_class.resize(o.per_class.size());
  for (std::size_t c = 0; c < o.per_class.size(); ++c) {
    per_class[c].tp += o.per_class[c].tp;
    per_class[c].fp += o.per_class[c].fp;
    per_class[c].fn += o.per_class[c].fn;
  }
  return *this;
}

FrameCounts count_frames(const LabelSequence& pred, const LabelSequence& gt,
                         std::size_t num_classes) {
  const std::size_t nc = resolve_classes(pred, gt, num_classes);
  if (gt.empty()) throw DataError("frame metrics on an empty sequence");
  FrameCounts fc;
  fc.per_class.resize(nc);
  fc.total = gt.size();
  for (std::size_t t = 0; t < gt.size(); ++t) {
    if (pred[t] == gt[t]) {
      ++fc.correct;
      ++fc.per_class[gt[t]].tp;
    } else {
      ++fc.per_class[pred[t]].fp;
      ++fc.per_class[gt[t]].fn;
    }
  }
  return fc;
}

FrameMetrics frame_metrics(const FrameCounts& counts) {
  FrameMetrics m;
  m.accuracy = percent(counts.correct, counts.total);
  std::size_t present = 0;
  for (std::size_t c = 0; c < counts.per_class.size(); ++c) {
    const ClassCounts& k = counts.per_class[c];
    if (!k.in_gt() && !k.in_pred()) continue;
    ClassScores s;
    s.label = static_cast<std::uint32_t>(c);
    s.precision = percent(k.tp, k.tp + k.fp);
    s.recall = percent(k.tp, k.tp + k.fn);
    s.jaccard = percent(k.tp, k.tp + k.fp + k.fn);
    s.in_gt = k.in_gt();
    if (s.in_gt) {
      ++present;
      m.macro_precision += s.precision;
      m.macro_recall += s.recall;
      m.macro_jaccard += s.jaccard;
    }
    m.per_class.push_back(s);
  }
  if (present > 0) {
    m.macro_precision /= static_cast<double>(present);
    m.macro_recall /= static_cast<double>(present);
    m.macro_jaccard /= static_cast<double>(present);
  }
  return m;
}

FrameMetrics frame_metrics(const LabelSequence& pred, const LabelSequence& gt,
                           std::size_t num_classes) {
  return frame_metrics(count_frames(pred, gt, num_classes));
}

std::vector<std::vector<double>> confusion_matrix(const LabelSequence& pred,
                                                  const LabelSequence& gt,
                                                  std::size_t num_classes, bool normalize) {
  const std::size_t nc = resolve_classes(pred, gt, num_classes);
  std::vector<std::vector<double>> cm(nc, std::vector<double>(nc, 0.0));
  for (std::size_t t = 0; t < gt.size(); ++t) cm[gt[t]][pred[t]] += 1.0;
  if (normalize) {
    for (auto& row : cm) {
      double sum = 0.0;
      for (double v : row) sum += v;
      if (sum > 0.0)
        for (double& v : row) v /= sum;
    }
  }
  return cm;
}

}  // namespace msast::metrics
