#include "msast/attention/window.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "msast/errors.hpp"

namespace msast::attention {

std::uint32_t window_schedule(std::uint32_t kernel, std::uint32_t layer) {
  if (layer < 1) throw ConfigError("window_schedule: layer index is 1-based, got 0");
  if (kernel < 3 || kernel % 2 == 0)
    throw ConfigError("window_schedule: no schedule for kernel size " + std::to_string(kernel) +
                      " (expected an odd kernel >= 3)");
  if (layer == 1) return 1;
  if (layer - 2 >= 32) throw ConfigError("window_schedule: layer index too large");
  const std::uint64_t w = static_cast<std::uint64_t>(kernel - 1) << (layer - 2);
  if (w > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("window_schedule: window overflows at layer " + std::to_string(layer));
  return static_cast<std::uint32_t>(w);
}

KeyRange admissible_keys(std::size_t t, std::size_t length, std::size_t window, bool causal) {
  if (window < 1) throw ConfigError("attention window must be >= 1");
  if (causal) {
    const std::size_t first = t + 1 >= window ? t + 1 - window : 0;
    return {first, t};
  }
  const std::size_t half = window / 2;
  const std::size_t first = t >= half ? t - half : 0;
  const std::size_t last = std::min(length - 1, t + std::min(half, length));
  return {first, last};
}

std::vector<bool> attention_mask(std::size_t length, std::size_t window, bool causal) {
  if (window < 1) throw ConfigError("attention window must be >= 1");
  std::vector<bool> mask(length * length, false);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t s = 0; s < length; ++s) {
      bool ok;
      if (causal) {
        ok = s <= t && t - s + 1 <= window;
      } else {
        const std::size_t dist = t > s ? t - s : s - t;
        ok = dist <= window / 2;
      }
      mask[t * length + s] = ok;
    }
  }
  return mask;
}

}  // namespace msast::attention
