#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace msast::attention {

/// Window size of the sliding attention paired with a conv kernel at 1-based
/// layer `layer`. Layer 1 always uses a window of 1; from layer 2 on the
/// window starts at (kernel - 1) and doubles every layer, so kernel 3 gives
/// 1, 2, 4, ..., 512 over ten layers, kernel 5 gives 1, 4, 8, ..., 1024 and
/// kernel 17 gives 1, 16, 32, ..., 4096.
///
/// Throws ConfigError for layer 0, even kernels, kernels below 3, or a window
/// that does not fit in 32 bits.
std::uint32_t window_schedule(std::uint32_t kernel, std::uint32_t layer);

struct WindowSpec {
  std::uint32_t kernel_size = 3;
  std::uint32_t layer_index = 1;
  std::uint32_t window_size = 1;
  bool causal = false;

  static WindowSpec for_layer(std::uint32_t kernel, std::uint32_t layer, bool causal) {
    return {kernel, layer, window_schedule(kernel, layer), causal};
  }
};

/// Inclusive range of key positions visible from query t.
struct KeyRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const { return last - first + 1; }
};

// acausal: |t - t'| <= floor(w/2); causal: t - w + 1 <= t' <= t.
KeyRange admissible_keys(std::size_t t, std::size_t length, std::size_t window, bool causal);

/// Row-major T x T boolean mask; mask[t * T + t'] is true when t may attend to t'.
std::vector<bool> attention_mask(std::size_t length, std::size_t window, bool causal);

}  // namespace msast::attention
