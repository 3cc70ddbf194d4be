#pragma once

#include <string>
#include <string_view>

#include "msast/types.hpp"

namespace msast::data {

inline constexpr char kFeatureMagic[9] = "MSFEAT01";

// Layout: "MSFEAT01" | u32 LE T | u32 LE D | T*D f32 LE, frame-major.
std::string encode_features(const FeatureSequence& features);
FeatureSequence decode_features(std::string_view bytes, const std::string& source = "features");

void write_feature_file(const std::string& path, const FeatureSequence& features);
FeatureSequence read_feature_file(const std::string& path);

}  // namespace msast::data
