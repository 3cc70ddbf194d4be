#include "msast/training/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "msast/detail/binary.hpp"
#include "msast/errors.hpp"

namespace msast::detail {

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path);
  return bytes;
}

void write_file_bytes(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path);
}

}  // namespace msast::detail

namespace msast::training {
namespace {

using detail::ByteReader;
using detail::ByteWriter;

void write_config(ByteWriter& w, const model::ModelConfig& c) {
  w.u32(static_cast<std::uint32_t>(c.kernels.size()));
  for (auto k : c.kernels) w.u32(k);
  w.u32(c.layers_per_stage);
  w.u32(c.feature_maps);
  w.u32(c.input_dim);
  w.u32(c.num_classes);
  w.u32(c.num_decoders);
  w.u32(c.causal ? 1 : 0);
  w.u32(std::bit_cast<std::uint32_t>(c.dropout));
  w.u32(std::bit_cast<std::uint32_t>(c.alpha_base));
}

model::ModelConfig read_config(ByteReader& r) {
  model::ModelConfig c;
  const std::uint32_t nk = r.u32();
  if (nk > 64) r.fail("implausible kernel count " + std::to_string(nk));
  c.kernels.resize(nk);
  for (auto& k : c.kernels) k = r.u32();
  c.layers_per_stage = r.u32();
  c.feature_maps = r.u32();
  c.input_dim = r.u32();
  c.num_classes = r.u32();
  c.num_decoders = r.u32();
  const std::uint32_t causal = r.u32();
  if (causal > 1) r.fail("causal flag must be 0 or 1");
  c.causal = causal == 1;
  c.dropout = std::bit_cast<float>(r.u32());
  c.alpha_base = std::bit_cast<float>(r.u32());
  return c;
}

template <class Values>
void write_tensor(ByteWriter& w, const Param<float>& p, const Values& values) {
  w.u16(static_cast<std::uint16_t>(p.name.size()));
  w.bytes(p.name);
  w.u8(static_cast<std::uint8_t>(p.dims.size()));
  for (auto d : p.dims) w.u32(d);
  for (float v : values.flat()) w.f32(v);
}

void write_tensors(ByteWriter& w, const std::vector<Param<float>>& params,
                   const std::vector<Mat<float>>* values) {
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i)
    write_tensor(w, params[i], values ? (*values)[i] : params[i].value);
}

// Reads one tensor section into `out`, checking every name and shape against
// the layout implied by the embedded config.
void read_tensors(ByteReader& r, const std::vector<Param<float>>& layout,
                  std::vector<Mat<float>>& out, const char* section) {
  const std::uint32_t count = r.u32();
  if (count != layout.size())
    r.fail(std::string(section) + ": " + std::to_string(count) +
           " tensors, config implies " + std::to_string(layout.size()));
  out.clear();
  for (const auto& p : layout) {
    const std::uint16_t len = r.u16();
    const std::string name(r.bytes(len));
    if (name != p.name)
      r.fail(std::string(section) + ": expected tensor " + p.name + ", found " + name);
    const std::uint8_t rank = r.u8();
    if (rank != p.dims.size())
      r.fail(std::string(section) + ": tensor " + name + " has rank " + std::to_string(rank) +
             ", config implies " + std::to_string(p.dims.size()));
    for (auto d : p.dims) {
      const std::uint32_t got = r.u32();
      if (got != d)
        r.fail(std::string(section) + ": tensor " + name + " dimension " + std::to_string(got) +
               " disagrees with config (" + std::to_string(d) + ")");
    }
    Mat<float> m(p.value.rows(), p.value.cols());
    for (auto& v : m.flat()) v = r.f32();
    out.push_back(std::move(m));
  }
}

}  // namespace

std::string serialize_checkpoint(const model::Model<float>& model, const AdamState<float>& adam) {
  if (adam.m.size() != model.params.size() || adam.v.size() != model.params.size())
    throw ShapeError("checkpoint: optimizer state does not match the model's parameters");
  ByteWriter w;
  w.bytes(std::string_view(kCheckpointMagic, 8));
  w.u32(kCheckpointVersion);
  write_config(w, model.config);
  write_tensors(w, model.params, nullptr);
  write_tensors(w, model.params, &adam.m);
  write_tensors(w, model.params, &adam.v);
  w.u64(adam.step);
  return w.take();
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  ByteReader r(bytes, "checkpoint");
  if (r.remaining() < 8 || r.bytes(8) != std::string_view(kCheckpointMagic, 8))
    throw DataError("checkpoint: bad magic (expected MSASTCK1)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw DataError("checkpoint: unsupported format version " + std::to_string(version) +
                    " (expected " + std::to_string(kCheckpointVersion) + ")");
  const model::ModelConfig cfg = read_config(r);
  const auto problems = cfg.violations();
  if (!problems.empty()) r.fail("embedded config is invalid: " + problems.front());

  Checkpoint ck{model::model_skeleton<float>(cfg), {}};
  std::vector<Mat<float>> values;
  read_tensors(r, ck.model.params, values, "parameters");
  for (std::size_t i = 0; i < values.size(); ++i) ck.model.params[i].value = std::move(values[i]);
  read_tensors(r, ck.model.params, ck.adam.m, "adam.m");
  read_tensors(r, ck.model.params, ck.adam.v, "adam.v");
  ck.adam.step = r.u64();
  if (r.remaining() != 0) r.fail(std::to_string(r.remaining()) + " trailing bytes");
  return ck;
}

void save_checkpoint(const model::Model<float>& model, const AdamState<float>& adam,
                     const std::string& path) {
  detail::write_file_bytes(path, serialize_checkpoint(model, adam));
}

Checkpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint(detail::read_file_bytes(path));
}

}  // namespace msast::training
