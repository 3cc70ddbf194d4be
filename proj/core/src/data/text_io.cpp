#include "msast/data/text_io.hpp"

#include <charconv>
#include <set>

#include "msast/detail/binary.hpp"
#include "msast/errors.hpp"

namespace msast::data {
namespace {

// Splits on '\n', strips '\r', drops one trailing empty line.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    pos = nl + 1;
  }
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_u32(std::string_view s, std::uint32_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::string read_text_file(const std::string& path) { return detail::read_file_bytes(path); }

void write_text_file(const std::string& path, std::string_view text) {
  detail::write_file_bytes(path, text);
}

LabelSequence parse_labels(std::string_view text, std::size_t expected_frames,
                           const std::string& source) {
  const auto lines = lines_of(text);
  LabelSequence out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::uint32_t v = 0;
    if (!parse_u32(lines[i], v))
      throw DataError(source + ": line " + std::to_string(i + 1) + " is not a class id: '" +
                      std::string(lines[i]) + "'");
    out.push_back(v);
  }
  if (out.size() != expected_frames)
    throw DataError(source + ": label count mismatch, expected " +
                    std::to_string(expected_frames) + " found " + std::to_string(out.size()));
  return out;
}

LabelSequence read_labels(const std::string& path, std::size_t expected_frames) {
  return parse_labels(read_text_file(path), expected_frames, path);
}

void write_labels(const std::string& path, const LabelSequence& labels) {
  std::string text;
  for (auto l : labels) text += std::to_string(l) + "\n";
  write_text_file(path, text);
}

std::vector<std::string> parse_mapping(std::string_view text, const std::string& source) {
  const auto lines = lines_of(text);
  std::vector<std::string> names(lines.size());
  std::vector<bool> seen(lines.size(), false);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    const std::size_t sp = line.find_first_of(" \t");
    std::uint32_t id = 0;
    if (sp == std::string_view::npos || !parse_u32(line.substr(0, sp), id))
      throw DataError(source + ": line " + std::to_string(i + 1) + " is not 'id name'");
    const std::string_view name = trim(line.substr(sp + 1));
    if (name.empty()) throw DataError(source + ": line " + std::to_string(i + 1) + " has no name");
    if (id >= lines.size())
      throw DataError(source + ": class id " + std::to_string(id) + " on line " +
                      std::to_string(i + 1) + " is not dense in 0.." +
                      std::to_string(lines.size() - 1));
    if (seen[id])
      throw DataError(source + ": duplicate class id " + std::to_string(id) + " on line " +
                      std::to_string(i + 1));
    seen[id] = true;
    names[id] = std::string(name);
  }
  if (names.empty()) throw DataError(source + ": empty class mapping");
  return names;
}

std::vector<std::string> read_mapping(const std::string& path) {
  return parse_mapping(read_text_file(path), path);
}

void write_mapping(const std::string& path, const std::vector<std::string>& names) {
  std::string text;
  for (std::size_t i = 0; i < names.size(); ++i) text += std::to_string(i) + " " + names[i] + "\n";
  write_text_file(path, text);
}

std::vector<std::string> parse_split(std::string_view text, const std::string& source) {
  std::vector<std::string> ids;
  std::set<std::string, std::less<>> seen;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view id = trim(lines[i]);
    if (id.empty()) throw DataError(source + ": empty video id on line " + std::to_string(i + 1));
    if (!seen.emplace(id).second)
      throw DataError(source + ": duplicate video id '" + std::string(id) + "' on line " +
                      std::to_string(i + 1));
    ids.emplace_back(id);
  }
  return ids;
}

std::vector<std::string> read_split(const std::string& path) {
  return parse_split(read_text_file(path), path);
}

void write_split(const std::string& path, const std::vector<std::string>& ids) {
  std::string text;
  for (const auto& id : ids) text += id + "\n";
  write_text_file(path, text);
}

}  // namespace msast::data
