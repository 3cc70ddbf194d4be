#include "msast/model/forward.hpp"

#include <cmath>
#include <string>

#include "msast/attention/sliding_window.hpp"
#include "msast/attention/window.hpp"
#include "msast/errors.hpp"

namespace msast::ad {

template <class S>
Var multiscale_fuse(Tape<S>& tp, Var h_base, std::span<const Var> attn_outs,
                    std::span<const Var> weights, S alpha) {
  std::vector<Mat<S>> outs;
  std::vector<S> w;
  outs.reserve(attn_outs.size());
  for (Var a : attn_outs) outs.push_back(tp.value(a));
  for (Var v : weights) {
    const Mat<S>& m = tp.value(v);
    if (m.rows() != 1 || m.cols() != 1)
      throw ShapeError("multiscale_fuse: fusion weight must be 1x1, got " + m.shape_str());
    w.push_back(m(0, 0));
  }
  Mat<S> out = model::multiscale_fuse<S>(tp.value(h_base), outs, w, alpha);

  std::vector<Var> parents{h_base};
  parents.insert(parents.end(), attn_outs.begin(), attn_outs.end());
  parents.insert(parents.end(), weights.begin(), weights.end());
  std::vector<Var> as(attn_outs.begin(), attn_outs.end());
  std::vector<Var> ws(weights.begin(), weights.end());
  return tp.push(std::move(out), parents, [h_base, as, ws, alpha](Tape<S>& t, Var self) {
    const Mat<S>& g = t.grad(self);
    if (t.needs_grad(h_base)) kernels::accumulate(t.grad(h_base), g);
    for (std::size_t j = 0; j < as.size(); ++j) {
      const S wj = t.value(ws[j])(0, 0);
      if (t.needs_grad(as[j])) {
        Mat<S>& ga = t.grad(as[j]);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += alpha * wj * g.data()[i];
      }
      if (t.needs_grad(ws[j])) {
        const Mat<S>& a = t.value(as[j]);
        S dot{0};
        for (std::size_t i = 0; i < g.size(); ++i) dot += a.data()[i] * g.data()[i];
        t.grad(ws[j])(0, 0) += alpha * dot;
      }
    }
  });
}

template Var multiscale_fuse(Tape<float>&, Var, std::span<const Var>, std::span<const Var>,
                             float);
template Var multiscale_fuse(Tape<double>&, Var, std::span<const Var>, std::span<const Var>,
                             double);

}  // namespace msast::ad

namespace msast::model {
namespace {

template <class S>
Var bind(Tape<S>& tp, const Model<S>& m, std::size_t id) {
  return tp.param(m.param(id));
}

kernels::ConvMode conv_mode(const ModelConfig& cfg) {
  return cfg.causal ? kernels::ConvMode::kCausal : kernels::ConvMode::kSymmetric;
}

std::size_t dilation_for(std::uint32_t layer) { return std::size_t{1} << (layer - 1); }

template <class S>
Var maybe_norm(Tape<S>& tp, const Model<S>& m, const BlockParamIds& block, Var h) {
  if (!block.norm_gain) return h;
  if (m.config.causal)
    throw LogicError("temporal normalization reached on a causal model's forward path");
  return ad::temporal_norm(tp, h, bind(tp, m, *block.norm_gain), bind(tp, m, *block.norm_bias));
}

// Shared tail: fuse, project, dropout, residual.
template <class S>
Var finish_block(Tape<S>& tp, const Model<S>& m, const BlockParamIds& block, Var x,
                 Var h_base, const std::vector<Var>& attn, S alpha, const ForwardContext& ctx) {
  std::vector<Var> ws;
  ws.reserve(block.scales.size());
  for (const auto& s : block.scales) ws.push_back(bind(tp, m, s.fuse));
  const Var fused = ad::multiscale_fuse<S>(tp, h_base, attn, ws, alpha);
  Var proj = ad::linear(tp, fused, bind(tp, m, block.out_w), bind(tp, m, block.out_b));
  const bool training = ctx.mode == Mode::kTrain;
  if (training && m.config.dropout > 0.0f) {
    if (!ctx.rng) throw LogicError("training forward pass needs an rng for dropout");
    proj = ad::dropout(tp, proj, static_cast<double>(m.config.dropout), *ctx.rng, true);
  }
  return ad::add(tp, x, proj);
}

template <class S>
Var stage_head(Tape<S>& tp, const Model<S>& m, const StageParamIds& st, Var h) {
  return ad::linear(tp, h, bind(tp, m, st.head_w), bind(tp, m, st.head_b));
}

}  // namespace

double alpha_schedule(std::uint32_t decoder_index, double alpha_base) {
  if (decoder_index < 1) throw ConfigError("alpha_schedule: decoder index is 1-based");
  return std::pow(alpha_base, -static_cast<double>(decoder_index - 1));
}

template <class S>
Mat<S> multiscale_fuse(const Mat<S>& h_base, std::span<const Mat<S>> attn_outs,
                       std::span<const S> weights, S alpha) {
  if (attn_outs.size() != weights.size() || attn_outs.empty())
    throw ShapeError("multiscale_fuse: " + std::to_string(attn_outs.size()) +
                     " attention outputs vs " + std::to_string(weights.size()) + " weights");
  Mat<S> acc(h_base.rows(), h_base.cols());
  for (std::size_t j = 0; j < attn_outs.size(); ++j) {
    require_same_shape(h_base, attn_outs[j], "multiscale_fuse");
    const S w = weights[j];
    const S* a = attn_outs[j].data();
    S* o = acc.data();
    if (j == 0) {
      for (std::size_t i = 0; i < acc.size(); ++i) o[i] = w * a[i];
    } else {
      for (std::size_t i = 0; i < acc.size(); ++i) o[i] = o[i] + w * a[i];
    }
  }
  Mat<S> out(h_base.rows(), h_base.cols());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = h_base.data()[i] + alpha * acc.data()[i];
  return out;
}

template <class S>
Var encoder_block(Tape<S>& tp, const Model<S>& m, const BlockParamIds& block, Var x,
                  std::uint32_t layer, const ForwardContext& ctx) {
  const ModelConfig& cfg = m.config;
  const auto mode = conv_mode(cfg);
  std::vector<Var> attn;
  Var h_base{};
  for (std::size_t j = 0; j < block.scales.size(); ++j) {
    const ScaleParamIds& s = block.scales[j];
    const std::uint32_t k = cfg.kernels[j];
    const Var h = ad::relu(tp, ad::conv1d(tp, x, bind(tp, m, s.conv_w), bind(tp, m, s.conv_b), k,
                                          dilation_for(layer), mode));
    if (j == 0) h_base = h;
    const Var n = maybe_norm(tp, m, block, h);
    const Var q = ad::matmul(tp, n, bind(tp, m, s.wq));
    const Var kk = ad::matmul(tp, n, bind(tp, m, s.wk));
    const Var v = ad::matmul(tp, n, bind(tp, m, s.wv));
    attn.push_back(ad::sliding_window_attention(tp, q, kk, v,
                                                attention::window_schedule(k, layer), cfg.causal));
  }
  return finish_block(tp, m, block, x, h_base, attn, S{1}, ctx);
}

template <class S>
Var decoder_block(Tape<S>& tp, const Model<S>& m, const BlockParamIds& block, Var x, Var enc_out,
                  std::uint32_t layer, S alpha, const ForwardContext& ctx) {
  require_same_shape(tp.value(x), tp.value(enc_out), "decoder_block x/enc_out");
  const ModelConfig& cfg = m.config;
  const auto mode = conv_mode(cfg);
  std::vector<Var> attn;
  Var h_base{};
  for (std::size_t j = 0; j < block.scales.size(); ++j) {
    const ScaleParamIds& s = block.scales[j];
    const std::uint32_t k = cfg.kernels[j];
    const Var h = ad::relu(tp, ad::conv1d(tp, x, bind(tp, m, s.conv_w), bind(tp, m, s.conv_b), k,
                                          dilation_for(layer), mode));
    if (j == 0) h_base = h;
    const Var n = maybe_norm(tp, m, block, h);
    const Var qk_in = ad::concat_cols(tp, n, enc_out);
    const Var q = ad::matmul(tp, qk_in, bind(tp, m, s.wq));
    const Var kk = ad::matmul(tp, qk_in, bind(tp, m, s.wk));
    const Var v = ad::matmul(tp, n, bind(tp, m, s.wv));
    attn.push_back(ad::sliding_window_attention(tp, q, kk, v,
                                                attention::window_schedule(k, layer), cfg.causal));
  }
  return finish_block(tp, m, block, x, h_base, attn, alpha, ctx);
}

template <class S>
std::vector<Var> forward_on_tape(Tape<S>& tp, const Model<S>& m, Var features,
                                 const ForwardContext& ctx) {
  const ModelConfig& cfg = m.config;
  const Mat<S>& f = tp.value(features);
  if (f.cols() != cfg.input_dim)
    throw ShapeError("forward: features have " + std::to_string(f.cols()) +
                     " columns, model expects input_dim " + std::to_string(cfg.input_dim));
  if (f.rows() < 1) throw ShapeError("forward: empty feature sequence");
  if (!cfg.causal && f.rows() < 2)
    throw ShapeError("forward: acausal models need at least 2 frames for temporal normalization");

  std::vector<Var> logits;
  Var x = ad::linear(tp, features, bind(tp, m, m.encoder.in_w), bind(tp, m, m.encoder.in_b));
  for (std::uint32_t l = 1; l <= m.encoder.blocks.size(); ++l)
    x = encoder_block(tp, m, m.encoder.blocks[l - 1], x, l, ctx);
  const Var enc_out = x;
  logits.push_back(stage_head(tp, m, m.encoder, enc_out));

  for (std::uint32_t d = 1; d <= m.decoders.size(); ++d) {
    const StageParamIds& st = m.decoders[d - 1];
    const S alpha = static_cast<S>(alpha_schedule(d, cfg.alpha_base));
    const Var probs = ad::softmax_rows(tp, logits.back());
    Var y = ad::linear(tp, probs, bind(tp, m, st.in_w), bind(tp, m, st.in_b));
    for (std::uint32_t l = 1; l <= st.blocks.size(); ++l)
      y = decoder_block(tp, m, st.blocks[l - 1], y, enc_out, l, alpha, ctx);
    logits.push_back(stage_head(tp, m, st, y));
  }
  return logits;
}

template <class S>
StageOutputs<S> forward_full(const Model<S>& m, const Mat<S>& features, Mode mode,
                             kernels::Rng* rng) {
  Tape<S> tp(false);
  const ForwardContext ctx{mode, rng};
  const auto vars = forward_on_tape(tp, m, tp.constant_ref(features), ctx);
  StageOutputs<S> out;
  for (Var v : vars) out.logits.push_back(tp.value(v));
  return out;
}

template <class S>
Mat<S> encoder_block_forward(const Model<S>& m, const BlockParamIds& block, const Mat<S>& x,
                             std::uint32_t layer, const ForwardContext& ctx) {
  Tape<S> tp(false);
  return tp.value(encoder_block(tp, m, block, tp.constant_ref(x), layer, ctx));
}

template <class S>
Mat<S> decoder_block_forward(const Model<S>& m, const BlockParamIds& block, const Mat<S>& x,
                             const Mat<S>& enc_out, std::uint32_t layer, S alpha,
                             const ForwardContext& ctx) {
  Tape<S> tp(false);
  return tp.value(decoder_block(tp, m, block, tp.constant_ref(x), tp.constant_ref(enc_out), layer,
                                alpha, ctx));
}

LabelSequence argmax_rows(const Matrix& scores) {
  LabelSequence out(scores.rows());
  for (std::size_t t = 0; t < scores.rows(); ++t) {
    std::uint32_t best = 0;
    for (std::uint32_t c = 1; c < scores.cols(); ++c)
      if (scores(t, c) > scores(t, best)) best = c;
    out[t] = best;
  }
  return out;
}

LabelSequence predict(const Model<float>& m, const Matrix& features) {
  const auto out = forward_full(m, features, Mode::kInfer);
  return argmax_rows(kernels::softmax_rows(out.final_stage()));
}

#define MSAST_INSTANTIATE_FORWARD(S)                                                          \
  template Mat<S> multiscale_fuse(const Mat<S>&, std::span<const Mat<S>>, std::span<const S>, \
                                  S);                                                         \
  template Var encoder_block(Tape<S>&, const Model<S>&, const BlockParamIds&, Var,            \
                             std::uint32_t, const ForwardContext&);                           \
  template Var decoder_block(Tape<S>&, const Model<S>&, const BlockParamIds&, Var, Var,       \
                             std::uint32_t, S, const ForwardContext&);                        \
  template std::vector<Var> forward_on_tape(Tape<S>&, const Model<S>&, Var,                   \
                                            const ForwardContext&);                           \
  template StageOutputs<S> forward_full(const Model<S>&, const Mat<S>&, Mode, kernels::Rng*); \
  template Mat<S> encoder_block_forward(const Model<S>&, const BlockParamIds&, const Mat<S>&,  \
                                        std::uint32_t, const ForwardContext&);                \
  template Mat<S> decoder_block_forward(const Model<S>&, const BlockParamIds&, const Mat<S>&, \
                                        const Mat<S>&, std::uint32_t, S,                      \
                                        const ForwardContext&);

MSAST_INSTANTIATE_FORWARD(float)
MSAST_INSTANTIATE_FORWARD(double)

#undef MSAST_INSTANTIATE_FORWARD

}  // namespace msast::model
