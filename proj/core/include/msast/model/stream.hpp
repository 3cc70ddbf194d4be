#pragma once

#include <cstdint>
#include <span>

#include "msast/model/model.hpp"
#include "msast/types.hpp"

namespace msast::model {

/// Frames received so far by an online recognizer. Owned by one caller.
class StreamState {
 public:
  explicit StreamState(std::uint32_t input_dim) : prefix_(0, input_dim) {}

  void reset() { prefix_.resize(0, prefix_.cols()); }
  std::size_t frames() const { return prefix_.rows(); }
  std::uint32_t input_dim() const { return static_cast<std::uint32_t>(prefix_.cols()); }
  const Matrix& prefix() const { return prefix_; }

  void append(std::span<const float> frame);

 private:
  Matrix prefix_;
};

/// Appends one frame and returns the final-stage logits (1 x num_classes) for
/// it. Equal to the last row of forward_full over the stored prefix, which is
/// also the matching row of forward_full over any longer sequence because the
/// model is causal. Throws ModeError for acausal models.
Matrix forward_stream(const Model<float>& m, std::span<const float> frame, StreamState& state);

}  // namespace msast::model
