#pragma once

#include <cstdint>
#include <vector>

#include "msast/types.hpp"

namespace msast::metrics {

/// Maximal run of one label over frames [start, end).
struct Segment {
  std::uint32_t label = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Splits a label sequence into maximal constant runs in temporal order.
/// Throws DataError on an empty sequence.
std::vector<Segment> segments_from_labels(const LabelSequence& labels);

/// Inverse of segments_from_labels.
LabelSequence labels_from_segments(const std::vector<Segment>& segments);

}  // namespace msast::metrics
