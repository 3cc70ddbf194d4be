#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "msast/types.hpp"

namespace msast::data {

// Labels: one non-negative integer per line. DataError on a non-integer line
// (with its line number) or when the count differs from `expected_frames`.
LabelSequence parse_labels(std::string_view text, std::size_t expected_frames,
                           const std::string& source = "labels");
LabelSequence read_labels(const std::string& path, std::size_t expected_frames);
void write_labels(const std::string& path, const LabelSequence& labels);

// Mapping: "id name" lines; ids must cover 0..C-1 exactly once.
std::vector<std::string> parse_mapping(std::string_view text, const std::string& source = "mapping");
std::vector<std::string> read_mapping(const std::string& path);
void write_mapping(const std::string& path, const std::vector<std::string>& names);

// Split: one video id per line, unique.
std::vector<std::string> parse_split(std::string_view text, const std::string& source = "split");
std::vector<std::string> read_split(const std::string& path);
void write_split(const std::string& path, const std::vector<std::string>& ids);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace msast::data
