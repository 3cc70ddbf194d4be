#include "msast/data/feature_io.hpp"

#include <limits>

#include "msast/detail/binary.hpp"
#include "msast/errors.hpp"

namespace msast::data {

std::string encode_features(const FeatureSequence& features) {
  if (!features.all_finite()) throw DataError("write_feature_file: non-finite feature value");
  if (features.rows() > std::numeric_limits<std::uint32_t>::max() ||
      features.cols() > std::numeric_limits<std::uint32_t>::max())
    throw DataError("write_feature_file: matrix too large for the format");
  detail::ByteWriter w;
  w.bytes(std::string_view(kFeatureMagic, 8));
  w.u32(static_cast<std::uint32_t>(features.rows()));
  w.u32(static_cast<std::uint32_t>(features.cols()));
  for (float v : features.flat()) w.f32(v);
  return w.take();
}

FeatureSequence decode_features(std::string_view bytes, const std::string& source) {
  detail::ByteReader r(bytes, source);
  const std::string_view magic = r.bytes(8);
  if (magic != std::string_view(kFeatureMagic, 8)) {
    if (magic.substr(0, 6) == "MSFEAT")
      throw DataError(source + ": unsupported feature file version '" + std::string(magic) +
                      "' at byte offset 0 (expected MSFEAT01)");
    throw DataError(source + ": bad magic at byte offset 0 (expected MSFEAT01)");
  }
  const std::uint32_t t = r.u32();
  const std::uint32_t d = r.u32();
  const std::uint64_t count = std::uint64_t{t} * d;
  if (count > std::numeric_limits<std::size_t>::max() / 4)
    r.fail("T*D = " + std::to_string(count) + " overflows");
  if (r.remaining() != count * 4)
    throw DataError(source + ": payload at byte offset 16 holds " +
                    std::to_string(r.remaining()) + " bytes, header T=" + std::to_string(t) +
                    " D=" + std::to_string(d) + " requires " + std::to_string(count * 4));
  FeatureSequence f(t, d);
  for (auto& v : f.flat()) v = r.f32();
  return f;
}

void write_feature_file(const std::string& path, const FeatureSequence& features) {
  detail::write_file_bytes(path, encode_features(features));
}

FeatureSequence read_feature_file(const std::string& path) {
  return decode_features(detail::read_file_bytes(path), path);
}

}  // namespace msast::data
