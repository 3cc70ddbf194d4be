#pragma once

#include <span>

#include "msast/numerics/tape.hpp"
#include "msast/types.hpp"

namespace msast::training {

struct LossConfig {
  double smooth_tau = 4.0;
  double smooth_lambda = 0.15;
};

// Log-probabilities are floored here inside the smoothing loss.
inline constexpr double kLogProbFloor = -18.420680743952367;  // log(1e-8)

/// Mean over frames of -log softmax(logits)_t[label_t]. Throws DataError for a
/// length mismatch or an out-of-range label (naming the frame).
template <class S>
S cross_entropy_loss(const Mat<S>& logits, const LabelSequence& labels);

/// Truncated MSE between consecutive frame log-probabilities:
/// mean over t >= 1 and classes of min(|lp_t - lp_{t-1}|, tau)^2, with the
/// previous frame treated as a constant for gradients. Returns 0 (and warns)
/// when T < 2.
template <class S>
S smoothing_loss(const Mat<S>& logits, S tau);

/// Row-wise log-softmax clamped below at kLogProbFloor.
template <class S>
Mat<S> floored_log_probs(const Mat<S>& logits);

/// Sum over stages of cross_entropy + lambda * smoothing.
template <class S>
S total_loss(const StageOutputs<S>& stages, const LabelSequence& labels, const LossConfig& cfg);

}  // namespace msast::training

namespace msast::ad {

template <class S>
Var cross_entropy(Tape<S>& tp, Var logits, const LabelSequence& labels);
template <class S>
Var smoothing_loss(Tape<S>& tp, Var logits, S tau);
template <class S>
Var total_loss(Tape<S>& tp, std::span<const Var> stages, const LabelSequence& labels,
               const training::LossConfig& cfg);

// Same losses with the previous-frame log-probs supplied as fixed tables:
// row t-1 of `previous` is compared against frame t. With `previous` equal to
// floored_log_probs of the logits themselves this is the detached loss above,
// and it is an ordinary differentiable function of the logits.
template <class S>
Var smoothing_loss_against(Tape<S>& tp, Var logits, const Mat<S>& previous, S tau);
template <class S>
Var total_loss_against(Tape<S>& tp, std::span<const Var> stages, const LabelSequence& labels,
                       const training::LossConfig& cfg, std::span<const Mat<S>> previous);

}  // namespace msast::ad
