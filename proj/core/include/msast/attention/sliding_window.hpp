#pragma once

#include <cstddef>
#include <vector>

#include "msast/attention/window.hpp"
#include "msast/numerics/matrix.hpp"
#include "msast/numerics/tape.hpp"

namespace msast::attention {

/// Saved softmax weights of a banded attention call.
template <class S>
struct AttentionCache {
  std::vector<KeyRange> ranges;    // per query row
  std::vector<std::size_t> offset;  // start of row t's weights in `probs`
  std::vector<S> probs;
};

/// Single-head scaled dot-product attention where query t only sees the keys
/// returned by admissible_keys(t, T, window, causal). Logits are scaled by
/// 1/sqrt(C). Work per row is proportional to its band, not to T.
template <class S>
Mat<S> sliding_window_attention(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                                std::size_t window, bool causal,
                                AttentionCache<S>* cache = nullptr);

template <class S>
Mat<S> sliding_window_attention(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                                const WindowSpec& spec) {
  return sliding_window_attention(q, k, v, spec.window_size, spec.causal);
}

template <class S>
void sliding_window_attention_backward(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                                       const AttentionCache<S>& cache, const Mat<S>& dout,
                                       Mat<S>* dq, Mat<S>* dk, Mat<S>* dv);

/// O(T^2) masked softmax attention with -inf fill on masked logits. Test
/// oracle only. Throws LogicError when a mask row admits nothing.
template <class S>
Mat<S> dense_masked_attention_reference(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                                        const std::vector<bool>& mask);

}  // namespace msast::attention

namespace msast::ad {

template <class S>
Var sliding_window_attention(Tape<S>& tp, Var q, Var k, Var v, std::size_t window, bool causal);

}  // namespace msast::ad
