#include "msast/metrics/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "msast/errors.hpp"

namespace msast::metrics {
namespace {

const char* kF1Keys[3] = {"f1@10", "f1@25", "f1@50"};

}  // namespace

EvalReport evaluate_video(std::string id, const LabelSequence& pred, const LabelSequence& gt,
                          std::size_t num_classes) {
  EvalReport r;
  r.id = std::move(id);
  r.counts = count_frames(pred, gt, num_classes);
  r.frame = frame_metrics(r.counts);
  r.edit = edit_score(pred, gt);
  for (std::size_t i = 0; i < kOverlapThresholds.size(); ++i) {
    r.overlap_counts[i] = overlap_counts(pred, gt, kOverlapThresholds[i]);
    r.f1[i] = f1_from_counts(r.overlap_counts[i]).f1;
  }
  r.f1_avg = f1_avg(r.f1[0], r.f1[1], r.f1[2]);
  const std::size_t nc = r.counts.per_class.size();
  r.confusion.assign(nc, std::vector<std::uint64_t>(nc, 0));
  for (std::size_t t = 0; t < gt.size(); ++t) ++r.confusion[gt[t]][pred[t]];
  return r;
}

const std::vector<std::string>& headline_keys() {
  static const std::vector<std::string> keys{"accuracy", "precision", "recall", "jaccard", "edit",
                                             "f1@10",    "f1@25",     "f1@50",  "f1_avg"};
  return keys;
}

MetricLines report_metrics(const EvalReport& r) {
  MetricLines out{{"accuracy", r.frame.accuracy},
                  {"precision", r.frame.macro_precision},
                  {"recall", r.frame.macro_recall},
                  {"jaccard", r.frame.macro_jaccard},
                  {"edit", r.edit}};
  for (std::size_t i = 0; i < 3; ++i) out.emplace_back(kF1Keys[i], r.f1[i]);
  out.emplace_back("f1_avg", r.f1_avg);
  for (const auto& c : r.frame.per_class) {
    const std::string s = std::to_string(c.label);
    out.emplace_back("precision/" + s, c.precision);
    out.emplace_back("recall/" + s, c.recall);
    out.emplace_back("jaccard/" + s, c.jaccard);
  }
  return out;
}

EvalReport pool_reports(std::span<const EvalReport> reports) {
  if (reports.empty()) throw DataError("aggregate: no reports");
  EvalReport pooled;
  pooled.id = "overall";
  double edit_sum = 0.0;
  for (const auto& r : reports) {
    pooled.counts += r.counts;
    for (std::size_t i = 0; i < 3; ++i) pooled.overlap_counts[i] += r.overlap_counts[i];
    edit_sum += r.edit;
    const std::size_t nc = r.confusion.size();
    if (pooled.confusion.size() < nc) {
      pooled.confusion.resize(nc);
      for (auto& row : pooled.confusion) row.resize(nc, 0);
    }
    for (std::size_t g = 0; g < nc; ++g)
      for (std::size_t p = 0; p < nc; ++p) pooled.confusion[g][p] += r.confusion[g][p];
  }
  pooled.frame = frame_metrics(pooled.counts);
  pooled.edit = edit_sum / static_cast<double>(reports.size());
  for (std::size_t i = 0; i < 3; ++i) pooled.f1[i] = f1_from_counts(pooled.overlap_counts[i]).f1;
  pooled.f1_avg = f1_avg(pooled.f1[0], pooled.f1[1], pooled.f1[2]);
  return pooled;
}

MetricLines aggregate(std::span<const EvalReport> reports, AggregateMode mode) {
  if (reports.empty()) throw DataError("aggregate: no reports");
  if (mode == AggregateMode::kOverall) return report_metrics(pool_reports(reports));

  std::map<std::string, std::vector<double>> values;
  for (const auto& r : reports)
    for (const auto& [k, v] : report_metrics(r)) values[k].push_back(v);
  MetricLines out;
  for (const auto& key : headline_keys()) {
    const auto& vs = values[key];
    double mean = 0.0;
    for (double v : vs) mean += v;
    mean /= static_cast<double>(vs.size());
    double var = 0.0;
    for (double v : vs) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vs.size());
    out.emplace_back(key + "_mean", mean);
    out.emplace_back(key + "_std", std::sqrt(var));
  }
  return out;
}

std::string format_metric_lines(const MetricLines& lines, const std::string& prefix) {
  std::string out;
  char buf[64];
  for (const auto& [k, v] : lines) {
    std::snprintf(buf, sizeof buf, "%.4f", v);
    out += prefix + k + "\t" + buf + "\n";
  }
  return out;
}

}  // namespace msast::metrics
