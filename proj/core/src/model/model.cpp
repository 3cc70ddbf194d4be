#include "msast/model/model.hpp"

#include <cmath>
#include <random>

namespace msast::model {
namespace {

enum class Init { kUniformFanIn, kZero, kOne };

template <class S>
class Builder {
 public:
  explicit Builder(Model<S>& m) : m_(m) {}

  std::size_t add(std::string name, std::vector<std::uint32_t> dims, std::size_t rows,
                  std::size_t cols, Init init, std::size_t fan_in = 1) {
    m_.params.emplace_back(std::move(name), std::move(dims), rows, cols);
    inits_.push_back({init, fan_in});
    return m_.params.size() - 1;
  }

  void fill(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < m_.params.size(); ++i) {
      auto& v = m_.params[i].value;
      switch (inits_[i].init) {
        case Init::kZero:
          v.fill(S{0});
          break;
        case Init::kOne:
          v.fill(S{1});
          break;
        case Init::kUniformFanIn: {
          const double bound = std::sqrt(1.0 / static_cast<double>(inits_[i].fan_in));
          std::uniform_real_distribution<double> uni(-bound, bound);
          for (auto& x : v.flat()) x = static_cast<S>(uni(rng));
          break;
        }
      }
    }
  }

 private:
  struct InitRule {
    Init init;
    std::size_t fan_in;
  };
  Model<S>& m_;
  std::vector<InitRule> inits_;
};

template <class S>
BlockParamIds add_block(Builder<S>& b, const ModelConfig& cfg, const std::string& prefix,
                        bool cross) {
  const std::uint32_t c = cfg.feature_maps;
  const std::uint32_t qk_in = cross ? 2 * c : c;
  BlockParamIds ids;
  for (std::size_t j = 0; j < cfg.kernels.size(); ++j) {
    const std::uint32_t k = cfg.kernels[j];
    const std::string sp = prefix + ".scale" + std::to_string(j);
    ScaleParamIds s;
    s.conv_w = b.add(sp + ".conv.weight", {k, c, c}, std::size_t{k} * c, c, Init::kUniformFanIn,
                     std::size_t{k} * c);
    s.conv_b = b.add(sp + ".conv.bias", {c}, 1, c, Init::kZero);
    s.wq = b.add(sp + ".attn.query", {qk_in, c}, qk_in, c, Init::kUniformFanIn, qk_in);
    s.wk = b.add(sp + ".attn.key", {qk_in, c}, qk_in, c, Init::kUniformFanIn, qk_in);
    s.wv = b.add(sp + ".attn.value", {c, c}, c, c, Init::kUniformFanIn, c);
    s.fuse = b.add(sp + ".fuse", {}, 1, 1, Init::kOne);
    ids.scales.push_back(s);
  }
  if (!cfg.causal) {
    ids.norm_gain = b.add(prefix + ".norm.gain", {c}, 1, c, Init::kOne);
    ids.norm_bias = b.add(prefix + ".norm.bias", {c}, 1, c, Init::kZero);
  }
  ids.out_w = b.add(prefix + ".out.weight", {c, c}, c, c, Init::kUniformFanIn, c);
  ids.out_b = b.add(prefix + ".out.bias", {c}, 1, c, Init::kZero);
  return ids;
}

template <class S>
StageParamIds add_stage(Builder<S>& b, const ModelConfig& cfg, const std::string& prefix,
                        std::uint32_t in_dim, bool cross) {
  const std::uint32_t c = cfg.feature_maps;
  StageParamIds st;
  st.in_w = b.add(prefix + ".input.weight", {in_dim, c}, in_dim, c, Init::kUniformFanIn, in_dim);
  st.in_b = b.add(prefix + ".input.bias", {c}, 1, c, Init::kZero);
  for (std::uint32_t l = 1; l <= cfg.layers_per_stage; ++l)
    st.blocks.push_back(add_block(b, cfg, prefix + ".block" + std::to_string(l), cross));
  st.head_w = b.add(prefix + ".head.weight", {c, cfg.num_classes}, c, cfg.num_classes,
                    Init::kUniformFanIn, c);
  st.head_b = b.add(prefix + ".head.bias", {cfg.num_classes}, 1, cfg.num_classes, Init::kZero);
  return st;
}

}  // namespace

template <class S>
std::size_t Model<S>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

template <class S>
std::size_t Model<S>::norm_parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params)
    if (p.name.find(".norm.") != std::string::npos) n += p.value.size();
  return n;
}

template <class S>
void Model<S>::zero_grad() {
  for (auto& p : params) p.zero_grad();
}

template <class S>
Model<S> build_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Model<S> m;
  m.config = cfg;
  Builder<S> b(m);
  m.encoder = add_stage(b, cfg, "encoder", cfg.input_dim, false);
  for (std::uint32_t d = 1; d <= cfg.num_decoders; ++d)
    m.decoders.push_back(add_stage(b, cfg, "decoder" + std::to_string(d), cfg.num_classes, true));
  b.fill(seed);
  return m;
}

template <class S>
Model<S> model_skeleton(const ModelConfig& cfg) {
  cfg.validate();
  Model<S> m;
  m.config = cfg;
  Builder<S> b(m);
  m.encoder = add_stage(b, cfg, "encoder", cfg.input_dim, false);
  for (std::uint32_t d = 1; d <= cfg.num_decoders; ++d)
    m.decoders.push_back(add_stage(b, cfg, "decoder" + std::to_string(d), cfg.num_classes, true));
  return m;
}

template struct Model<float>;
template struct Model<double>;
template Model<float> build_model(const ModelConfig&, std::uint64_t);
template Model<double> build_model(const ModelConfig&, std::uint64_t);
template Model<float> model_skeleton(const ModelConfig&);
template Model<double> model_skeleton(const ModelConfig&);

}  // namespace msast::model
