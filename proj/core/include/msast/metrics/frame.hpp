#pragma once

#include <cstdint>
#include <vector>

#include "msast/types.hpp"

namespace msast::metrics {

struct ClassCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  bool in_gt() const { return tp + fn > 0; }
  bool in_pred() const { return tp + fp > 0; }
};

/// Raw frame counts; summing these across videos gives pooled metrics.
struct FrameCounts {
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  std::vector<ClassCounts> per_class;

  FrameCounts& operator+=(const FrameCounts& o);
};

struct ClassScores {
  std::uint32_t label = 0;
  double precision = 0.0;  // percent
  double recall = 0.0;
  double jaccard = 0.0;
  bool in_gt = false;
};

struct FrameMetrics {
  double accuracy = 0.0;  // percent
  // Classes present in ground truth or prediction, ascending by label.
  std::vector<ClassScores> per_class;
  // Means over classes present in ground truth.
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_jaccard = 0.0;
};

/// `num_classes` of 0 means max label + 1 over both sequences.
/// Throws DataError on a length mismatch or empty input.
FrameCounts count_frames(const LabelSequence& pred, const LabelSequence& gt,
                         std::size_t num_classes = 0);

FrameMetrics frame_metrics(const FrameCounts& counts);
FrameMetrics frame_metrics(const LabelSequence& pred, const LabelSequence& gt,
                           std::size_t num_classes = 0);

/// C x C matrix indexed [gt][pred]. With `normalize` each row is divided by
/// its sum; rows of classes absent from gt stay zero.
std::vector<std::vector<double>> confusion_matrix(const LabelSequence& pred,
                                                  const LabelSequence& gt,
                                                  std::size_t num_classes, bool normalize);

}  // namespace msast::metrics
