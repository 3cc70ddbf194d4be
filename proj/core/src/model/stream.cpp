#include "msast/model/stream.hpp"

#include <algorithm>
#include <string>

#include "msast/errors.hpp"
#include "msast/model/forward.hpp"

namespace msast::model {

void StreamState::append(std::span<const float> frame) {
  if (frame.size() != prefix_.cols())
    throw ShapeError("stream frame has " + std::to_string(frame.size()) + " values, expected " +
                     std::to_string(prefix_.cols()));
  Matrix grown(prefix_.rows() + 1, prefix_.cols());
  std::copy(prefix_.data(), prefix_.data() + prefix_.size(), grown.data());
  std::copy(frame.begin(), frame.end(), grown.row_ptr(prefix_.rows()));
  prefix_ = std::move(grown);
}

Matrix forward_stream(const Model<float>& m, std::span<const float> frame, StreamState& state) {
  if (!m.config.causal) throw ModeError("streaming requires a causal model");
  if (state.input_dim() != m.config.input_dim)
    throw ShapeError("stream state input_dim " + std::to_string(state.input_dim()) +
                     " does not match model input_dim " + std::to_string(m.config.input_dim));
  state.append(frame);
  const auto out = forward_full(m, state.prefix(), Mode::kInfer);
  return out.final_stage().slice_rows(state.frames() - 1, state.frames());
}

}  // namespace msast::model
