#include "msast/model/config.hpp"

#include <cmath>

#include "msast/attention/window.hpp"
#include "msast/errors.hpp"

namespace msast::model {

std::vector<std::string> ModelConfig::violations() const {
  std::vector<std::string> v;
  if (kernels.empty()) {
    v.emplace_back("kernels must not be empty");
  } else {
    if (kernels.front() != 3) v.emplace_back("kernels[0] must be 3 (base scale)");
    for (std::size_t i = 0; i < kernels.size(); ++i) {
      if (kernels[i] < 3) v.push_back("kernel " + std::to_string(kernels[i]) + " is below 3");
      if (kernels[i] % 2 == 0) v.push_back("kernel " + std::to_string(kernels[i]) + " is even");
      if (i > 0 && kernels[i] <= kernels[i - 1])
        v.emplace_back("kernels must be strictly increasing");
    }
  }
  if (layers_per_stage < 1) v.emplace_back("layers_per_stage must be >= 1");
  if (layers_per_stage > 24) v.emplace_back("layers_per_stage must be <= 24");
  if (feature_maps < 1) v.emplace_back("feature_maps must be >= 1");
  if (input_dim < 1) v.emplace_back("input_dim must be >= 1");
  if (num_classes < 1) v.emplace_back("num_classes must be >= 1");
  if (num_decoders < 1) v.emplace_back("num_decoders must be >= 1");
  if (!(dropout >= 0.0f && dropout < 1.0f)) v.emplace_back("dropout must be in [0, 1)");
  if (!(alpha_base > 0.0f) || !std::isfinite(alpha_base))
    v.emplace_back("alpha_base must be a positive finite number");
  if (v.empty()) {
    for (auto k : kernels) {
      try {
        (void)attention::window_schedule(k, layers_per_stage);
      } catch (const ConfigError& e) {
        v.emplace_back(e.what());
      }
    }
  }
  return v;
}

void ModelConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid model config:";
  for (const auto& s : v) msg += "\n  - " + s;
  throw ConfigError(msg);
}

ModelConfig offline_config(std::uint32_t input_dim, std::uint32_t num_classes) {
  ModelConfig c;
  c.input_dim = input_dim;
  c.num_classes = num_classes;
  return c;
}

ModelConfig online_config(std::uint32_t input_dim, std::uint32_t num_classes) {
  ModelConfig c = offline_config(input_dim, num_classes);
  c.causal = true;
  c.num_decoders = 1;
  return c;
}

}  // namespace msast::model
