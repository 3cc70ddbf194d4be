#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msast/metrics/frame.hpp"
#include "msast/metrics/segmental.hpp"

namespace msast::metrics {

/// Metrics of one video (or of pooled counts). Scores are percentages.
struct EvalReport {
  std::string id;
  FrameCounts counts;
  FrameMetrics frame;
  double edit = 0.0;
  std::array<SegmentalCounts, 3> overlap_counts{};  // at kOverlapThresholds
  std::array<double, 3> f1{};
  double f1_avg = 0.0;
  std::vector<std::vector<std::uint64_t>> confusion;  // [gt][pred]
};

EvalReport evaluate_video(std::string id, const LabelSequence& pred, const LabelSequence& gt,
                          std::size_t num_classes);

using MetricLines = std::vector<std::pair<std::string, double>>;

/// Stable key names: accuracy, precision, recall, jaccard, edit, f1@10, f1@25,
/// f1@50, f1_avg, then precision/<c>, recall/<c>, jaccard/<c> per class.
MetricLines report_metrics(const EvalReport& r);

/// The headline keys aggregated in per-video mode.
const std::vector<std::string>& headline_keys();

enum class AggregateMode { kOverall, kPerVideo };

/// per_video: "<key>_mean" and "<key>_std" (population) over videos for every
/// headline key. overall: metrics recomputed from counts pooled over all
/// videos; edit (not count-decomposable) is the mean of per-video edits.
/// Throws DataError on an empty list.
MetricLines aggregate(std::span<const EvalReport> reports, AggregateMode mode);

/// Pooled counts of all reports as one report (id "overall").
EvalReport pool_reports(std::span<const EvalReport> reports);

/// "key<TAB>value" per line, values with four decimals.
std::string format_metric_lines(const MetricLines& lines, const std::string& prefix = "");

}  // namespace msast::metrics
