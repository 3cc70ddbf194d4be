#include "msast/attention/sliding_window.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "msast/errors.hpp"
#include "msast/numerics/kernels.hpp"

namespace msast::attention {
namespace {

template <class S>
void check_qkv(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v) {
  require_same_shape(q, k, "attention Q/K");
  require_same_shape(q, v, "attention Q/V");
  if (q.cols() < 1) throw ShapeError("attention needs at least one channel");
}

}  // namespace

template <class S>
Mat<S> sliding_window_attention(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                                std::size_t window, bool causal, AttentionCache<S>* cache) {
  check_qkv(q, k, v);
  const std::size_t t_len = q.rows();
  const std::size_t ch = q.cols();
  const S scale = S{1} / std::sqrt(static_cast<S>(ch));
  const Mat<S> kt = kernels::transpose(k);

  Mat<S> out(t_len, ch);
  std::vector<S> local;
  if (cache) {
    cache->ranges.resize(t_len);
    cache->offset.resize(t_len);
    cache->probs.clear();
  }
  for (std::size_t t = 0; t < t_len; ++t) {
    const KeyRange r = admissible_keys(t, t_len, window, causal);
    const std::size_t n = r.size();
    local.assign(n, S{0});
    S* s = local.data();
    const S* qr = q.row_ptr(t);
    for (std::size_t c = 0; c < ch; ++c) {
      const S qc = qr[c];
      const S* kr = kt.row_ptr(c) + r.first;
      for (std::size_t j = 0; j < n; ++j) s[j] = s[j] + qc * kr[j];
    }
    S mx = -std::numeric_limits<S>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      s[j] *= scale;
      mx = std::max(mx, s[j]);
    }
    S sum{0};
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = std::exp(s[j] - mx);
      sum += s[j];
    }
    for (std::size_t j = 0; j < n; ++j) s[j] /= sum;

    S* o = out.row_ptr(t);
    for (std::size_t j = 0; j < n; ++j) {
      const S p = s[j];
      const S* vr = v.row_ptr(r.first + j);
      for (std::size_t c = 0; c < ch; ++c) o[c] = o[c] + p * vr[c];
    }
    if (cache) {
      cache->ranges[t] = r;
      cache->offset[t] = cache->probs.size();
      cache->probs.insert(cache->probs.end(), local.begin(), local.end());
    }
  }
  return out;
}

template <class S>
void sliding_window_attention_backward(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                                       const AttentionCache<S>& cache, const Mat<S>& dout,
                                       Mat<S>* dq, Mat<S>* dk, Mat<S>* dv) {
  const std::size_t t_len = q.rows();
  const std::size_t ch = q.cols();
  const S scale = S{1} / std::sqrt(static_cast<S>(ch));
  const Mat<S> vt = kernels::transpose(v);
  std::vector<S> ds;
  for (std::size_t t = 0; t < t_len; ++t) {
    const KeyRange r = cache.ranges[t];
    const std::size_t n = r.size();
    const S* p = cache.probs.data() + cache.offset[t];
    const S* g = dout.row_ptr(t);

    ds.assign(n, S{0});
    for (std::size_t c = 0; c < ch; ++c) {
      const S gc = g[c];
      const S* vr = vt.row_ptr(c) + r.first;
      for (std::size_t j = 0; j < n; ++j) ds[j] += gc * vr[j];
    }
    if (dv) {
      for (std::size_t j = 0; j < n; ++j) {
        S* dvr = dv->row_ptr(r.first + j);
        for (std::size_t c = 0; c < ch; ++c) dvr[c] += p[j] * g[c];
      }
    }
    S dot{0};
    for (std::size_t j = 0; j < n; ++j) dot += p[j] * ds[j];
    for (std::size_t j = 0; j < n; ++j) ds[j] = p[j] * (ds[j] - dot) * scale;

    if (dq) {
      S* dqr = dq->row_ptr(t);
      for (std::size_t j = 0; j < n; ++j) {
        const S* kr = k.row_ptr(r.first + j);
        for (std::size_t c = 0; c < ch; ++c) dqr[c] += ds[j] * kr[c];
      }
    }
    if (dk) {
      const S* qr = q.row_ptr(t);
      for (std::size_t j = 0; j < n; ++j) {
        S* dkr = dk->row_ptr(r.first + j);
        for (std::size_t c = 0; c < ch; ++c) dkr[c] += ds[j] * qr[c];
      }
    }
  }
}

template <class S>
Mat<S> dense_masked_attention_reference(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                                        const std::vector<bool>& mask) {
  check_qkv(q, k, v);
  const std::size_t t_len = q.rows();
  const std::size_t ch = q.cols();
  if (mask.size() != t_len * t_len)
    throw ShapeError("dense attention: mask size " + std::to_string(mask.size()) +
                     " does not match T=" + std::to_string(t_len));
  const S inf = std::numeric_limits<S>::infinity();
  const S scale = S{1} / std::sqrt(static_cast<S>(ch));
  Mat<S> out(t_len, ch);
  std::vector<S> logits(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    bool any = false;
    for (std::size_t s = 0; s < t_len; ++s) {
      if (!mask[t * t_len + s]) {
        logits[s] = -inf;
        continue;
      }
      any = true;
      S dot{0};
      for (std::size_t c = 0; c < ch; ++c) dot += q(t, c) * k(s, c);
      logits[s] = dot * scale;
    }
    if (!any) throw LogicError("dense attention: mask row " + std::to_string(t) + " is empty");
    const S mx = *std::max_element(logits.begin(), logits.end());
    S sum{0};
    for (auto& l : logits) {
      l = std::exp(l - mx);
      sum += l;
    }
    for (std::size_t s = 0; s < t_len; ++s)
      for (std::size_t c = 0; c < ch; ++c) out(t, c) += logits[s] / sum * v(s, c);
  }
  return out;
}

template Mat<float> sliding_window_attention(const Mat<float>&, const Mat<float>&,
                                             const Mat<float>&, std::size_t, bool,
                                             AttentionCache<float>*);
template Mat<double> sliding_window_attention(const Mat<double>&, const Mat<double>&,
                                              const Mat<double>&, std::size_t, bool,
                                              AttentionCache<double>*);
template void sliding_window_attention_backward(const Mat<float>&, const Mat<float>&,
                                                const Mat<float>&, const AttentionCache<float>&,
                                                const Mat<float>&, Mat<float>*, Mat<float>*,
                                                Mat<float>*);
template void sliding_window_attention_backward(const Mat<double>&, const Mat<double>&,
                                                const Mat<double>&,
                                                const AttentionCache<double>&,
                                                const Mat<double>&, Mat<double>*, Mat<double>*,
                                                Mat<double>*);
template Mat<float> dense_masked_attention_reference(const Mat<float>&, const Mat<float>&,
                                                     const Mat<float>&, const std::vector<bool>&);
template Mat<double> dense_masked_attention_reference(const Mat<double>&, const Mat<double>&,
                                                      const Mat<double>&,
                                                      const std::vector<bool>&);

}  // namespace msast::attention

namespace msast::ad {

template <class S>
Var sliding_window_attention(Tape<S>& tp, Var q, Var k, Var v, std::size_t window, bool causal) {
  attention::AttentionCache<S> cache;
  Mat<S> out = attention::sliding_window_attention(tp.value(q), tp.value(k), tp.value(v), window,
                                                   causal, tp.recording() ? &cache : nullptr);
  return tp.push(std::move(out), {q, k, v}, [=, cache = std::move(cache)](Tape<S>& t, Var self) {
    attention::sliding_window_attention_backward(
        t.value(q), t.value(k), t.value(v), cache, t.grad(self),
        t.needs_grad(q) ? &t.grad(q) : nullptr, t.needs_grad(k) ? &t.grad(k) : nullptr,
        t.needs_grad(v) ? &t.grad(v) : nullptr);
  });
}

template Var sliding_window_attention(Tape<float>&, Var, Var, Var, std::size_t, bool);
template Var sliding_window_attention(Tape<double>&, Var, Var, Var, std::size_t, bool);

}  // namespace msast::ad
