#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msast/model/model.hpp"
#include "msast/numerics/tape.hpp"
#include "msast/types.hpp"

namespace msast::model {

enum class Mode { kTrain, kInfer };

struct ForwardContext {
  Mode mode = Mode::kInfer;
  kernels::Rng* rng = nullptr;  // required when mode == kTrain and dropout > 0
};

/// Decay of the attention term in decoder `decoder_index` (1-based):
/// base^-(d-1). Encoder blocks use 1.
double alpha_schedule(std::uint32_t decoder_index, double alpha_base);

/// h_base + alpha * sum_j w_j * attn_outs[j].
template <class S>
Mat<S> multiscale_fuse(const Mat<S>& h_base, std::span<const Mat<S>> attn_outs,
                       std::span<const S> weights, S alpha);

/// Encoder block at 1-based `layer`:
///   h_j = relu(conv_{k_j}(x, dilation 2^(layer-1)))
///   n_j = temporal_norm(h_j) (acausal only)
///   a_j = windowed self-attention on n_j
///   x + dropout(project(multiscale_fuse(h_1, a, w, 1)))
template <class S>
Var encoder_block(Tape<S>& tp, const Model<S>& m, const BlockParamIds& block, Var x,
                  std::uint32_t layer, const ForwardContext& ctx);

/// Decoder block: like the encoder block, but Q and K of every scale are
/// projected from [n_j | enc_out] (2C wide) and V from n_j only.
template <class S>
Var decoder_block(Tape<S>& tp, const Model<S>& m, const BlockParamIds& block, Var x, Var enc_out,
                  std::uint32_t layer, S alpha, const ForwardContext& ctx);

/// Records the full encoder/decoder stack; returns one logits node per stage.
template <class S>
std::vector<Var> forward_on_tape(Tape<S>& tp, const Model<S>& m, Var features,
                                 const ForwardContext& ctx);

template <class S>
StageOutputs<S> forward_full(const Model<S>& m, const Mat<S>& features, Mode mode = Mode::kInfer,
                             kernels::Rng* rng = nullptr);

// Matrix-level block entry points (no gradient recording).
template <class S>
Mat<S> encoder_block_forward(const Model<S>& m, const BlockParamIds& block, const Mat<S>& x,
                             std::uint32_t layer, const ForwardContext& ctx = {});
template <class S>
Mat<S> decoder_block_forward(const Model<S>& m, const BlockParamIds& block, const Mat<S>& x,
                             const Mat<S>& enc_out, std::uint32_t layer, S alpha,
                             const ForwardContext& ctx = {});

/// Argmax of each row; ties go to the smaller class id.
LabelSequence argmax_rows(const Matrix& scores);

/// Per-frame argmax of the final-stage softmax.
LabelSequence predict(const Model<float>& m, const Matrix& features);

}  // namespace msast::model

namespace msast::ad {

template <class S>
Var multiscale_fuse(Tape<S>& tp, Var h_base, std::span<const Var> attn_outs,
                    std::span<const Var> weights, S alpha);

}  // namespace msast::ad
