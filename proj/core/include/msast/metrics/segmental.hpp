#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "msast/metrics/segments.hpp"

namespace msast::metrics {

inline constexpr std::array<double, 3> kOverlapThresholds{0.10, 0.25, 0.50};

/// 100 * (1 - Levenshtein(pred labels, gt labels) / max(|pred|, |gt|)) over
/// segment label strings, unit costs. Throws DataError on empty input.
double edit_score(std::span<const Segment> pred, std::span<const Segment> gt);
double edit_score(const LabelSequence& pred, const LabelSequence& gt);

struct SegmentalCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  SegmentalCounts& operator+=(const SegmentalCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

struct F1Result {
  double precision = 0.0;  // percent
  double recall = 0.0;
  double f1 = 0.0;
};

/// Each predicted segment is matched to the same-label ground-truth segment of
/// highest IoU (earliest on ties). It is a true positive when that IoU is at
/// least `threshold` and the ground-truth segment is still unmatched,
/// otherwise a false positive. Unmatched ground-truth segments are false
/// negatives. Throws DataError on a length mismatch.
SegmentalCounts overlap_counts(const LabelSequence& pred, const LabelSequence& gt,
                               double threshold);

F1Result f1_from_counts(const SegmentalCounts& c);
F1Result f1_at_overlap(const LabelSequence& pred, const LabelSequence& gt, double threshold);

/// Mean of F1@10, F1@25 and F1@50.
double f1_avg(double f10, double f25, double f50);

}  // namespace msast::metrics
