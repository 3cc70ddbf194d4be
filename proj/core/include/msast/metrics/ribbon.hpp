#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "msast/types.hpp"

namespace msast::metrics {

struct Rgb {
  std::uint8_t r, g, b;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Fixed 16-entry palette indexed by class id.
const std::array<Rgb, 16>& ribbon_palette();

inline constexpr std::size_t kDefaultBandHeight = 24;

/// Binary PPM (P6): one horizontal band of `band_height` rows per sequence,
/// top to bottom in the given order, one pixel column per frame.
/// Throws DataError for unequal lengths, an empty list, or a label >= 16.
std::string render_ribbon(const std::vector<std::pair<std::string, LabelSequence>>& sequences,
                          std::size_t band_height = kDefaultBandHeight);

/// render_ribbon written to `path`; IoError when the path is not writable.
void emit_ribbon(const std::vector<std::pair<std::string, LabelSequence>>& sequences,
                 const std::string& path, std::size_t band_height = kDefaultBandHeight);

}  // namespace msast::metrics
