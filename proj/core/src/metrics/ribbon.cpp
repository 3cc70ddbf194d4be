#include "msast/metrics/ribbon.hpp"

#include "msast/detail/binary.hpp"
#include "msast/errors.hpp"

namespace msast::metrics {

const std::array<Rgb, 16>& ribbon_palette() {
  static const std::array<Rgb, 16> palette{{
      {31, 119, 180},  {255, 127, 14},  {44, 160, 44},   {214, 39, 40},
      {148, 103, 189}, {140, 86, 75},   {227, 119, 194}, {127, 127, 127},
      {188, 189, 34},  {23, 190, 207},  {174, 199, 232}, {255, 187, 120},
      {152, 223, 138}, {255, 152, 150}, {197, 176, 213}, {0, 0, 0},
  }};
  return palette;
}

std::string render_ribbon(const std::vector<std::pair<std::string, LabelSequence>>& sequences,
                          std::size_t band_height) {
  if (sequences.empty()) throw DataError("ribbon: no sequences");
  if (band_height == 0) throw DataError("ribbon: band height must be >= 1");
  const std::size_t width = sequences.front().second.size();
  if (width == 0) throw DataError("ribbon: empty sequence");
  const auto& palette = ribbon_palette();
  for (const auto& [name, seq] : sequences) {
    if (seq.size() != width)
      throw DataError("ribbon: sequence '" + name + "' has " + std::to_string(seq.size()) +
                      " frames, expected " + std::to_string(width));
    for (auto l : seq)
      if (l >= palette.size())
        throw DataError("ribbon: class " + std::to_string(l) + " exceeds the 16-color palette");
  }
  const std::size_t height = band_height * sequences.size();
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + width * height * 3);
  for (const auto& [name, seq] : sequences) {
    std::string row;
    row.reserve(width * 3);
    for (auto l : seq) {
      const Rgb c = palette[l];
      row.push_back(static_cast<char>(c.r));
      row.push_back(static_cast<char>(c.g));
      row.push_back(static_cast<char>(c.b));
    }
    for (std::size_t y = 0; y < band_height; ++y) out += row;
  }
  return out;
}

void emit_ribbon(const std::vector<std::pair<std::string, LabelSequence>>& sequences,
                 const std::string& path, std::size_t band_height) {
  detail::write_file_bytes(path, render_ribbon(sequences, band_height));
}

}  // namespace msast::metrics
