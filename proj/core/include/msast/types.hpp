#pragma once

#include <cstdint>
#include <vector>

#include "msast/numerics/matrix.hpp"

namespace msast {

/// T x D per-frame features, one row per second of video.
using FeatureSequence = Matrix;

/// One class id per frame.
using LabelSequence = std::vector<std::uint32_t>;

/// Per-stage logits, encoder first, each T x num_classes.
template <class S>
struct StageOutputs {
  std::vector<Mat<S>> logits;

  const Mat<S>& final_stage() const { return logits.back(); }
};

}  // namespace msast
