#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "msast/model/config.hpp"
#include "msast/training/trainer.hpp"

namespace msast::cli {

struct ConfigKey {
  const char* name;
  const char* help;
};

/// Flat key=value run description. input_dim and num_classes of 0 are filled
/// in from the dataset.
struct RunConfig {
  model::ModelConfig model;
  training::TrainConfig train;
  std::string data_root;
  std::string split = "train";

  // Every accepted key, in echo order.
  static const std::vector<ConfigKey>& keys();

  // ConfigError for an unknown key or an unparsable value.
  void set(const std::string& key, std::string_view value);
  std::string get(const std::string& key) const;

  // "key=value" per line for every key, in keys() order.
  std::string to_text() const;
};

/// '#' starts a comment; blank lines are skipped. Later keys override earlier
/// ones. ConfigError names the line.
RunConfig parse_run_config(std::string_view text, const std::string& source = "config");
RunConfig load_run_config(const std::string& path);

}  // namespace msast::cli
