#include <cmath>
#include <string>

#include "msast/errors.hpp"
#include "msast/numerics/tape.hpp"

namespace msast::ad {

namespace k = kernels;

template <class S>
Var matmul(Tape<S>& tp, Var a, Var b) {
  return tp.push(k::matmul(tp.value(a), tp.value(b)), {a, b}, [a, b](Tape<S>& t, Var self) {
    const Mat<S>& g = t.grad(self);
    k::matmul_backward(t.value(a), t.value(b), g, t.needs_grad(a) ? &t.grad(a) : nullptr,
                       t.needs_grad(b) ? &t.grad(b) : nullptr);
  });
}

template <class S>
Var add(Tape<S>& tp, Var a, Var b) {
  return tp.push(k::add(tp.value(a), tp.value(b)), {a, b}, [a, b](Tape<S>& t, Var self) {
    const Mat<S>& g = t.grad(self);
    if (t.needs_grad(a)) k::accumulate(t.grad(a), g);
    if (t.needs_grad(b)) k::accumulate(t.grad(b), g);
  });
}

template <class S>
Var add_row_bias(Tape<S>& tp, Var x, Var bias) {
  return tp.push(k::add_row_bias(tp.value(x), tp.value(bias)), {x, bias},
                 [x, bias](Tape<S>& t, Var self) {
                   const Mat<S>& g = t.grad(self);
                   if (t.needs_grad(x)) k::accumulate(t.grad(x), g);
                   if (t.needs_grad(bias)) k::accumulate(t.grad(bias), k::column_sums(g));
                 });
}

template <class S>
Var linear(Tape<S>& tp, Var x, Var w, Var bias) {
  const Mat<S>& b = tp.value(bias);
  const Mat<S>& wv = tp.value(w);
  if (b.rows() != 1 || b.cols() != wv.cols())
    throw ShapeError("linear: bias " + b.shape_str() + " does not fit weight " + wv.shape_str());
  const Mat<S>& xv = tp.value(x);
  if (xv.cols() != wv.rows())
    throw ShapeError("linear: input " + xv.shape_str() + " vs weight " + wv.shape_str());
  Mat<S> out(xv.rows(), wv.cols());
  for (std::size_t r = 0; r < out.rows(); ++r)
    std::copy(b.data(), b.data() + b.cols(), out.row_ptr(r));
  k::matmul_acc(xv, wv, out);
  return tp.push(std::move(out), {x, w, bias}, [x, w, bias](Tape<S>& t, Var self) {
    const Mat<S>& g = t.grad(self);
    k::matmul_backward(t.value(x), t.value(w), g, t.needs_grad(x) ? &t.grad(x) : nullptr,
                       t.needs_grad(w) ? &t.grad(w) : nullptr);
    if (t.needs_grad(bias)) k::accumulate(t.grad(bias), k::column_sums(g));
  });
}

template <class S>
Var relu(Tape<S>& tp, Var x) {
  return tp.push(k::relu(tp.value(x)), {x}, [x](Tape<S>& t, Var self) {
    k::accumulate(t.grad(x), k::relu_backward(t.value(x), t.grad(self)));
  });
}

template <class S>
Var dropout(Tape<S>& tp, Var x, double rate, Rng& rng, bool training) {
  auto r = k::dropout(tp.value(x), rate, rng, training);
  if (!training || rate == 0.0) return x;
  return tp.push(std::move(r.out), {x}, [x, mask = std::move(r.mask)](Tape<S>& t, Var self) {
    const Mat<S>& g = t.grad(self);
    Mat<S>& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += g.data()[i] * mask.data()[i];
  });
}

template <class S>
Var conv1d(Tape<S>& tp, Var x, Var w, Var b, std::size_t kernel, std::size_t dilation,
           ConvMode mode) {
  return tp.push(
      k::dilated_conv1d(tp.value(x), tp.value(w), tp.value(b), kernel, dilation, mode),
      {x, w, b}, [=](Tape<S>& t, Var self) {
        k::dilated_conv1d_backward(t.value(x), t.value(w), kernel, dilation, mode, t.grad(self),
                                   t.needs_grad(x) ? &t.grad(x) : nullptr,
                                   t.needs_grad(w) ? &t.grad(w) : nullptr,
                                   t.needs_grad(b) ? &t.grad(b) : nullptr);
      });
}

template <class S>
Var temporal_norm(Tape<S>& tp, Var x, Var gain, Var bias) {
  k::TemporalNormCache<S> cache;
  Mat<S> y = k::temporal_norm(tp.value(x), tp.value(gain), tp.value(bias), &cache);
  return tp.push(std::move(y), {x, gain, bias},
                 [=, cache = std::move(cache)](Tape<S>& t, Var self) {
                   k::temporal_norm_backward(cache, t.value(gain), t.grad(self),
                                             t.needs_grad(x) ? &t.grad(x) : nullptr,
                                             t.needs_grad(gain) ? &t.grad(gain) : nullptr,
                                             t.needs_grad(bias) ? &t.grad(bias) : nullptr);
                 });
}

template <class S>
Var softmax_rows(Tape<S>& tp, Var x) {
  return tp.push(k::softmax_rows(tp.value(x)), {x}, [x](Tape<S>& t, Var self) {
    k::accumulate(t.grad(x), k::softmax_rows_backward(t.value(self), t.grad(self)));
  });
}

template <class S>
Var concat_cols(Tape<S>& tp, Var a, Var b) {
  const std::size_t ca = tp.value(a).cols();
  return tp.push(k::concat_cols(tp.value(a), tp.value(b)), {a, b},
                 [a, b, ca](Tape<S>& t, Var self) {
                   const Mat<S>& g = t.grad(self);
                   const std::size_t cb = g.cols() - ca;
                   if (t.needs_grad(a)) {
                     Mat<S>& ga = t.grad(a);
                     for (std::size_t r = 0; r < g.rows(); ++r)
                       for (std::size_t c = 0; c < ca; ++c) ga(r, c) += g(r, c);
                   }
                   if (t.needs_grad(b)) {
                     Mat<S>& gb = t.grad(b);
                     for (std::size_t r = 0; r < g.rows(); ++r)
                       for (std::size_t c = 0; c < cb; ++c) gb(r, c) += g(r, ca + c);
                   }
                 });
}

template <class S>
Var weighted_sum(Tape<S>& tp, Var x, const Mat<S>& weights) {
  const Mat<S>& xv = tp.value(x);
  require_same_shape(xv, weights, "weighted_sum");
  Mat<S> out(1, 1);
  for (std::size_t i = 0; i < xv.size(); ++i) out(0, 0) += xv.data()[i] * weights.data()[i];
  return tp.push(std::move(out), {x}, [x, weights](Tape<S>& t, Var self) {
    const S g = t.grad(self)(0, 0);
    Mat<S>& gx = t.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx.data()[i] += g * weights.data()[i];
  });
}

template <class S>
Var sum_scalars(Tape<S>& tp, std::span<const Var> xs) {
  Mat<S> out(1, 1);
  for (Var v : xs) {
    const Mat<S>& m = tp.value(v);
    if (m.rows() != 1 || m.cols() != 1) throw ShapeError("sum_scalars: non-scalar " + m.shape_str());
    out(0, 0) += m(0, 0);
  }
  std::vector<Var> parents(xs.begin(), xs.end());
  return tp.push(std::move(out), xs, [parents](Tape<S>& t, Var self) {
    const S g = t.grad(self)(0, 0);
    for (Var v : parents)
      if (t.needs_grad(v)) t.grad(v)(0, 0) += g;
  });
}

template <class S>
Var scale(Tape<S>& tp, Var x, S factor) {
  Mat<S> out = tp.value(x);
  for (auto& v : out.flat()) v *= factor;
  return tp.push(std::move(out), {x}, [x, factor](Tape<S>& t, Var self) {
    const Mat<S>& g = t.grad(self);
    Mat<S>& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += factor * g.data()[i];
  });
}

#define MSAST_INSTANTIATE_AD(S)                                                          \
  template Var matmul(Tape<S>&, Var, Var);                                               \
  template Var add(Tape<S>&, Var, Var);                                                  \
  template Var add_row_bias(Tape<S>&, Var, Var);                                         \
  template Var linear(Tape<S>&, Var, Var, Var);                                          \
  template Var relu(Tape<S>&, Var);                                                      \
  template Var dropout(Tape<S>&, Var, double, Rng&, bool);                               \
  template Var conv1d(Tape<S>&, Var, Var, Var, std::size_t, std::size_t, ConvMode);      \
  template Var temporal_norm(Tape<S>&, Var, Var, Var);                                   \
  template Var softmax_rows(Tape<S>&, Var);                                              \
  template Var concat_cols(Tape<S>&, Var, Var);                                          \
  template Var weighted_sum(Tape<S>&, Var, const Mat<S>&);                               \
  template Var sum_scalars(Tape<S>&, std::span<const Var>);                              \
  template Var scale(Tape<S>&, Var, S);

MSAST_INSTANTIATE_AD(float)
MSAST_INSTANTIATE_AD(double)

#undef MSAST_INSTANTIATE_AD

}  // namespace msast::ad
