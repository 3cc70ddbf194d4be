#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msast/model/config.hpp"
#include "msast/numerics/param.hpp"

namespace msast::model {

// Indices into Model::params.

struct ScaleParamIds {
  std::size_t conv_w = 0;  // (k * C) x C dilated conv feed-forward
  std::size_t conv_b = 0;
  std::size_t wq = 0;  // C x C (encoder) or 2C x C (decoder)
  std::size_t wk = 0;
  std::size_t wv = 0;    // C x C
  std::size_t fuse = 0;  // 1x1 learned fusion weight
};

struct BlockParamIds {
  std::vector<ScaleParamIds> scales;
  std::size_t out_w = 0;  // shared 1x1 output projection
  std::size_t out_b = 0;
  std::optional<std::size_t> norm_gain;  // acausal models only
  std::optional<std::size_t> norm_bias;
};

struct StageParamIds {
  std::size_t in_w = 0;  // D x C for the encoder, num_classes x C for decoders
  std::size_t in_b = 0;
  std::vector<BlockParamIds> blocks;
  std::size_t head_w = 0;  // C x num_classes
  std::size_t head_b = 0;
};

template <class S>
struct Model {
  ModelConfig config;
  std::vector<Param<S>> params;
  StageParamIds encoder;
  std::vector<StageParamIds> decoders;

  const Param<S>& param(std::size_t id) const { return params.at(id); }
  Param<S>& param(std::size_t id) { return params.at(id); }
  std::size_t stage_count() const { return 1 + decoders.size(); }
  std::size_t parameter_count() const;
  std::size_t norm_parameter_count() const;
  void zero_grad();

  template <class U>
  Model<U> cast() const {
    Model<U> m;
    m.config = config;
    m.encoder = encoder;
    m.decoders = decoders;
    m.params.reserve(params.size());
    for (const auto& p : params) m.params.push_back(p.template cast<U>());
    return m;
  }
};

/// Lays out every parameter for `cfg` and fills it deterministically from
/// `seed`: weights uniform in +-sqrt(1/fan_in), biases zero, fusion weights
/// and norm gains one. Throws ConfigError for an invalid config.
template <class S>
Model<S> build_model(const ModelConfig& cfg, std::uint64_t seed);

/// Re-creates the parameter layout of `cfg` with zero values. Used when
/// loading a checkpoint.
template <class S>
Model<S> model_skeleton(const ModelConfig& cfg);

}  // namespace msast::model
