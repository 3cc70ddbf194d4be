#pragma once

#include <string>
#include <string_view>

#include "msast/model/model.hpp"
#include "msast/training/adam.hpp"

namespace msast::training {

inline constexpr char kCheckpointMagic[9] = "MSASTCK1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  model::Model<float> model;
  AdamState<float> adam;
};

// Layout, all little-endian:
//   "MSASTCK1" | u32 version
//   config: u32 #kernels, u32 kernels..., u32 layers_per_stage, u32 feature_maps,
//           u32 input_dim, u32 num_classes, u32 num_decoders, u32 causal,
//           u32 bits(dropout), u32 bits(alpha_base)
//   u32 #params, then per param: u16 name length, name, u8 rank, u32 dims[rank],
//           f32 values
//   Adam m and Adam v in the same param layout
//   u64 step
std::string serialize_checkpoint(const model::Model<float>& model, const AdamState<float>& adam);
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const model::Model<float>& model, const AdamState<float>& adam,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace msast::training
