#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace msast::model {

struct ModelConfig {
  std::vector<std::uint32_t> kernels{3, 5, 17};  // one attention scale per kernel
  std::uint32_t layers_per_stage = 10;
  std::uint32_t feature_maps = 64;
  std::uint32_t input_dim = 0;
  std::uint32_t num_classes = 0;
  std::uint32_t num_decoders = 3;
  bool causal = false;
  float dropout = 0.5f;
  float alpha_base = 2.0f;

  std::size_t stage_count() const { return 1 + num_decoders; }

  // Every violated constraint, empty when the config is usable.
  std::vector<std::string> violations() const;
  // Throws ConfigError listing all violations.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Offline preset: one encoder, three decoders.
ModelConfig offline_config(std::uint32_t input_dim, std::uint32_t num_classes);
// Online preset: causal, one encoder, one decoder.
ModelConfig online_config(std::uint32_t input_dim, std::uint32_t num_classes);

}  // namespace msast::model
