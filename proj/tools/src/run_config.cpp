#include "msast/cli/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>

#include "msast/data/text_io.hpp"
#include "msast/errors.hpp"

namespace msast::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, std::string_view v) {
  T out{};
  const std::string s = trim(v);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError("config key '" + key + "': cannot parse '" + s + "'");
  return out;
}

bool parse_bool(const std::string& key, std::string_view v) {
  const std::string s = trim(v);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + s + "'");
}

std::vector<std::uint32_t> parse_kernels(const std::string& key, std::string_view v) {
  std::vector<std::uint32_t> out;
  std::string s = trim(v);
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto end = comma == std::string::npos ? s.size() : comma;
    out.push_back(parse_number<std::uint32_t>(key, std::string_view(s).substr(pos, end - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_float(float v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

struct Field {
  const char* help;
  std::function<void(RunConfig&, const std::string&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, Field>>& fields() {
  using R = RunConfig;
  using K = const std::string&;
  using V = std::string_view;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"kernels",
       {"comma-separated conv kernel sizes, one attention scale each",
        [](R& c, K k, V v) { c.model.kernels = parse_kernels(k, v); },
        [](const R& c) {
          std::string s;
          for (std::size_t i = 0; i < c.model.kernels.size(); ++i)
            s += (i ? "," : "") + std::to_string(c.model.kernels[i]);
          return s;
        }}},
      {"layers_per_stage",
       {"dilated layers in the encoder and in each decoder",
        [](R& c, K k, V v) { c.model.layers_per_stage = parse_number<std::uint32_t>(k, v); },
        [](const R& c) { return std::to_string(c.model.layers_per_stage); }}},
      {"feature_maps",
       {"hidden channels C",
        [](R& c, K k, V v) { c.model.feature_maps = parse_number<std::uint32_t>(k, v); },
        [](const R& c) { return std::to_string(c.model.feature_maps); }}},
      {"num_classes",
       {"output classes; 0 takes the dataset mapping size",
        [](R& c, K k, V v) { c.model.num_classes = parse_number<std::uint32_t>(k, v); },
        [](const R& c) { return std::to_string(c.model.num_classes); }}},
      {"input_dim",
       {"feature width D; 0 takes it from the first training video",
        [](R& c, K k, V v) { c.model.input_dim = parse_number<std::uint32_t>(k, v); },
        [](const R& c) { return std::to_string(c.model.input_dim); }}},
      {"num_decoders",
       {"refinement decoders after the encoder",
        [](R& c, K k, V v) { c.model.num_decoders = parse_number<std::uint32_t>(k, v); },
        [](const R& c) { return std::to_string(c.model.num_decoders); }}},
      {"causal",
       {"true for the online model (causal conv and attention, no normalization)",
        [](R& c, K k, V v) { c.model.causal = parse_bool(k, v); },
        [](const R& c) { return std::string(c.model.causal ? "true" : "false"); }}},
      {"dropout",
       {"dropout rate on each block's projected output",
        [](R& c, K k, V v) { c.model.dropout = parse_number<float>(k, v); },
        [](const R& c) { return fmt_float(c.model.dropout); }}},
      {"alpha_base",
       {"decoder attention decay: alpha_d = alpha_base^-(d-1)",
        [](R& c, K k, V v) { c.model.alpha_base = parse_number<float>(k, v); },
        [](const R& c) { return fmt_float(c.model.alpha_base); }}},
      {"epochs",
       {"training epochs",
        [](R& c, K k, V v) { c.train.epochs = parse_number<std::uint32_t>(k, v); },
        [](const R& c) { return std::to_string(c.train.epochs); }}},
      {"learning_rate",
       {"Adam step size",
        [](R& c, K k, V v) { c.train.learning_rate = parse_number<double>(k, v); },
        [](const R& c) { return fmt_double(c.train.learning_rate); }}},
      {"smooth_tau",
       {"truncation of the smoothing loss",
        [](R& c, K k, V v) { c.train.smooth_tau = parse_number<double>(k, v); },
        [](const R& c) { return fmt_double(c.train.smooth_tau); }}},
      {"smooth_lambda",
       {"weight of the smoothing loss",
        [](R& c, K k, V v) { c.train.smooth_lambda = parse_number<double>(k, v); },
        [](const R& c) { return fmt_double(c.train.smooth_lambda); }}},
      {"seed",
       {"seeds weight init, shuffling and dropout",
        [](R& c, K k, V v) { c.train.seed = parse_number<std::uint64_t>(k, v); },
        [](const R& c) { return std::to_string(c.train.seed); }}},
      {"data_root",
       {"dataset directory",
        [](R& c, K, V v) { c.data_root = trim(v); },
        [](const R& c) { return c.data_root; }}},
      {"split",
       {"split to train on",
        [](R& c, K, V v) { c.split = trim(v); },
        [](const R& c) { return c.split; }}},
  };
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& [name, f] : fields())
    if (name == key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<ConfigKey>& RunConfig::keys() {
  static const std::vector<ConfigKey> out = [] {
    std::vector<ConfigKey> k;
    for (const auto& [name, f] : fields()) k.push_back({name.c_str(), f.help});
    return k;
  }();
  return out;
}

void RunConfig::set(const std::string& key, std::string_view value) {
  find_field(key).set(*this, key, value);
}

std::string RunConfig::get(const std::string& key) const { return find_field(key).get(*this); }

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [name, f] : fields()) out += name + "=" + f.get(*this) + "\n";
  return out;
}

RunConfig parse_run_config(std::string_view text, const std::string& source) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value");
    try {
      cfg.set(trim(std::string_view(stripped).substr(0, eq)),
              std::string_view(stripped).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(data::read_text_file(path), path);
}

}  // namespace msast::cli
