#include "msast/metrics/segments.hpp"

#include "msast/errors.hpp"

namespace msast::metrics {

std::vector<Segment> segments_from_labels(const LabelSequence& labels) {
  if (labels.empty()) throw DataError("segments_from_labels: empty label sequence");
  std::vector<Segment> segs;
  std::size_t start = 0;
  for (std::size_t t = 1; t <= labels.size(); ++t) {
    if (t == labels.size() || labels[t] != labels[start]) {
      segs.push_back({labels[start], start, t});
      start = t;
    }
  }
  return segs;
}

LabelSequence labels_from_segments(const std::vector<Segment>& segments) {
  LabelSequence out;
  for (const auto& s : segments) out.insert(out.end(), s.length(), s.label);
  return out;
}

}  // namespace msast::metrics
