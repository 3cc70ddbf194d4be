#include "msast/numerics/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "msast/errors.hpp"

namespace msast::kernels {
namespace {

// C[0:m, 0:n] += A[0:m, 0:k] * B[0:k, 0:n] on strided row-major storage.
//
// Each output element is accumulated as c = c + a_ik * b_kj in increasing k,
// whichever branch below handles it, so results never depend on m or on the
// row's position inside a tile.
template <class S>
void gemm_acc(const S* a, std::size_t lda, const S* b, std::size_t ldb, S* c, std::size_t ldc,
              std::size_t m, std::size_t k, std::size_t n) {
  constexpr std::size_t kRows = 4;
  constexpr std::size_t kCols = 128 / sizeof(S);

  auto tail = [&](std::size_t i, std::size_t j0) {
    S* __restrict crow = c + i * ldc;
    const S* arow = a + i * lda;
    for (std::size_t p = 0; p < k; ++p) {
      const S av = arow[p];
      const S* __restrict brow = b + p * ldb;
      for (std::size_t j = j0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
    }
  };

  std::size_t i = 0;
  for (; i + kRows <= m; i += kRows) {
    std::size_t j = 0;
    for (; j + kCols <= n; j += kCols) {
      S acc[kRows][kCols];
      for (std::size_t r = 0; r < kRows; ++r)
        for (std::size_t q = 0; q < kCols; ++q) acc[r][q] = c[(i + r) * ldc + j + q];
      for (std::size_t p = 0; p < k; ++p) {
        const S* brow = b + p * ldb + j;
        S av[kRows];
        for (std::size_t r = 0; r < kRows; ++r) av[r] = a[(i + r) * lda + p];
        for (std::size_t r = 0; r < kRows; ++r)
          for (std::size_t q = 0; q < kCols; ++q) acc[r][q] = acc[r][q] + av[r] * brow[q];
      }
      for (std::size_t r = 0; r < kRows; ++r)
        for (std::size_t q = 0; q < kCols; ++q) c[(i + r) * ldc + j + q] = acc[r][q];
    }
    if (j < n)
      for (std::size_t r = 0; r < kRows; ++r) tail(i + r, j);
  }
  for (; i < m; ++i) {
    std::size_t j = 0;
    for (; j + kCols <= n; j += kCols) {
      S acc[kCols];
      for (std::size_t q = 0; q < kCols; ++q) acc[q] = c[i * ldc + j + q];
      for (std::size_t p = 0; p < k; ++p) {
        const S av = a[i * lda + p];
        const S* brow = b + p * ldb + j;
        for (std::size_t q = 0; q < kCols; ++q) acc[q] = acc[q] + av * brow[q];
      }
      for (std::size_t q = 0; q < kCols; ++q) c[i * ldc + j + q] = acc[q];
    }
    if (j < n) tail(i, j);
  }
}

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
}

void check_conv(std::size_t kernel, std::size_t dilation, ConvMode mode) {
  if (kernel < 1) throw ConfigError("conv kernel size must be >= 1");
  if (dilation < 1) throw ConfigError("conv dilation must be >= 1");
  if (mode == ConvMode::kSymmetric && kernel % 2 == 0)
    throw ConfigError("symmetric conv requires an odd kernel, got " + std::to_string(kernel));
}

// Output rows [lo, hi) of tap `off` read input rows [lo + off, hi + off).
struct TapRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

TapRange tap_range(std::ptrdiff_t off, std::size_t t) {
  const auto tt = static_cast<std::ptrdiff_t>(t);
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -off);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(tt, tt - off);
  if (hi <= lo) return {};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

std::ptrdiff_t conv_tap_offset(std::size_t k, std::size_t kernel, std::size_t dilation,
                               ConvMode mode) {
  const auto kk = static_cast<std::ptrdiff_t>(k);
  const auto kn = static_cast<std::ptrdiff_t>(kernel);
  const auto d = static_cast<std::ptrdiff_t>(dilation);
  if (mode == ConvMode::kCausal) return -(kn - 1 - kk) * d;
  return (kk - kn / 2) * d;
}

template <class S>
Mat<S> matmul(const Mat<S>& a, const Mat<S>& b) {
  Mat<S> out(a.rows(), b.cols());
  matmul_acc(a, b, out);
  return out;
}

template <class S>
void matmul_acc(const Mat<S>& a, const Mat<S>& b, Mat<S>& out) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions disagree, " + a.shape_str() + " * " +
                     b.shape_str());
  if (out.rows() != a.rows() || out.cols() != b.cols())
    throw ShapeError("matmul: output " + out.shape_str() + " does not fit " + a.shape_str() +
                     " * " + b.shape_str());
  gemm_acc(a.data(), a.cols(), b.data(), b.cols(), out.data(), out.cols(), a.rows(), a.cols(),
           b.cols());
}

template <class S>
Mat<S> transpose(const Mat<S>& a) {
  Mat<S> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

template <class S>
void matmul_backward(const Mat<S>& a, const Mat<S>& b, const Mat<S>& dout, Mat<S>* da,
                     Mat<S>* db) {
  if (da) matmul_acc(dout, transpose(b), *da);
  if (db) matmul_acc(transpose(a), dout, *db);
}

template <class S>
Mat<S> add(const Mat<S>& a, const Mat<S>& b) {
  require_same_shape(a, b, "add");
  Mat<S> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  return out;
}

template <class S>
Mat<S> add_row_bias(const Mat<S>& x, const Mat<S>& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols())
    throw ShapeError("add_row_bias: bias " + bias.shape_str() + " does not fit " + x.shape_str());
  Mat<S> out(x.rows(), x.cols());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const S* xr = x.row_ptr(t);
    S* o = out.row_ptr(t);
    for (std::size_t c = 0; c < x.cols(); ++c) o[c] = xr[c] + bias(0, c);
  }
  return out;
}

template <class S>
Mat<S> column_sums(const Mat<S>& x) {
  Mat<S> out(1, x.cols());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const S* xr = x.row_ptr(t);
    for (std::size_t c = 0; c < x.cols(); ++c) out(0, c) += xr[c];
  }
  return out;
}

template <class S>
Mat<S> relu(const Mat<S>& x) {
  Mat<S> out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = std::max(x.data()[i], S{0});
  return out;
}

template <class S>
Mat<S> relu_backward(const Mat<S>& x, const Mat<S>& dout) {
  require_same_shape(x, dout, "relu_backward");
  Mat<S> dx(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i)
    dx.data()[i] = x.data()[i] > S{0} ? dout.data()[i] : S{0};
  return dx;
}

template <class S>
DropoutResult<S> dropout(const Mat<S>& x, double rate, Rng& rng, bool training) {
  check_rate(rate);
  DropoutResult<S> r{x, Mat<S>(x.rows(), x.cols(), S{1})};
  if (!training || rate == 0.0) return r;
  const S keep_scale = static_cast<S>(1.0 / (1.0 - rate));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const S m = uni(rng) < rate ? S{0} : keep_scale;
    r.mask.data()[i] = m;
    r.out.data()[i] = x.data()[i] * m;
  }
  return r;
}

template <class S>
Mat<S> dilated_conv1d(const Mat<S>& x, const Mat<S>& w, const Mat<S>& b, std::size_t kernel,
                      std::size_t dilation, ConvMode mode) {
  check_conv(kernel, dilation, mode);
  const std::size_t cin = x.cols();
  if (w.rows() != kernel * cin)
    throw ShapeError("dilated_conv1d: weight " + w.shape_str() + " does not match kernel " +
                     std::to_string(kernel) + " x input " + x.shape_str());
  if (b.rows() != 1 || b.cols() != w.cols())
    throw ShapeError("dilated_conv1d: bias " + b.shape_str() + " vs weight " + w.shape_str());
  const std::size_t t = x.rows();
  const std::size_t cout = w.cols();
  Mat<S> y(t, cout);
  for (std::size_t i = 0; i < t; ++i) std::copy(b.data(), b.data() + cout, y.row_ptr(i));
  for (std::size_t k = 0; k < kernel; ++k) {
    const auto off = conv_tap_offset(k, kernel, dilation, mode);
    const auto r = tap_range(off, t);
    if (r.hi == r.lo) continue;
    gemm_acc(x.row_ptr(r.lo + off), cin, w.row_ptr(k * cin), cout, y.row_ptr(r.lo), cout,
             r.hi - r.lo, cin, cout);
  }
  return y;
}

template <class S>
void dilated_conv1d_backward(const Mat<S>& x, const Mat<S>& w, std::size_t kernel,
                             std::size_t dilation, ConvMode mode, const Mat<S>& dout, Mat<S>* dx,
                             Mat<S>* dw, Mat<S>* db) {
  check_conv(kernel, dilation, mode);
  const std::size_t t = x.rows();
  const std::size_t cin = x.cols();
  const std::size_t cout = w.cols();
  const Mat<S> xt = dw ? transpose(x) : Mat<S>();
  for (std::size_t k = 0; k < kernel; ++k) {
    const auto off = conv_tap_offset(k, kernel, dilation, mode);
    const auto r = tap_range(off, t);
    if (r.hi == r.lo) continue;
    const std::size_t n = r.hi - r.lo;
    if (dx) {
      Mat<S> wk_t(cout, cin);
      for (std::size_t ci = 0; ci < cin; ++ci)
        for (std::size_t co = 0; co < cout; ++co) wk_t(co, ci) = w(k * cin + ci, co);
      gemm_acc(dout.row_ptr(r.lo), cout, wk_t.data(), cin, dx->row_ptr(r.lo + off), cin, n, cout,
               cin);
    }
    if (dw) {
      gemm_acc(xt.data() + (r.lo + off), t, dout.row_ptr(r.lo), cout, dw->row_ptr(k * cin), cout,
               cin, n, cout);
    }
  }
  if (db) accumulate(*db, column_sums(dout));
}

template <class S>
Mat<S> softmax_rows(const Mat<S>& x) {
  Mat<S> y(x.rows(), x.cols());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const S* xr = x.row_ptr(t);
    S* yr = y.row_ptr(t);
    S mx = -std::numeric_limits<S>::infinity();
    for (std::size_t c = 0; c < x.cols(); ++c) mx = std::max(mx, xr[c]);
    S sum{0};
    for (std::size_t c = 0; c < x.cols(); ++c) {
      yr[c] = std::exp(xr[c] - mx);
      sum += yr[c];
    }
    for (std::size_t c = 0; c < x.cols(); ++c) yr[c] /= sum;
  }
  return y;
}

template <class S>
Mat<S> softmax_rows_backward(const Mat<S>& y, const Mat<S>& dout) {
  require_same_shape(y, dout, "softmax_rows_backward");
  Mat<S> dx(y.rows(), y.cols());
  for (std::size_t t = 0; t < y.rows(); ++t) {
    const S* yr = y.row_ptr(t);
    const S* gr = dout.row_ptr(t);
    S dot{0};
    for (std::size_t c = 0; c < y.cols(); ++c) dot += yr[c] * gr[c];
    S* dr = dx.row_ptr(t);
    for (std::size_t c = 0; c < y.cols(); ++c) dr[c] = yr[c] * (gr[c] - dot);
  }
  return dx;
}

template <class S>
Mat<S> log_softmax_rows(const Mat<S>& x) {
  Mat<S> y(x.rows(), x.cols());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    const S* xr = x.row_ptr(t);
    S mx = -std::numeric_limits<S>::infinity();
    for (std::size_t c = 0; c < x.cols(); ++c) mx = std::max(mx, xr[c]);
    S sum{0};
    for (std::size_t c = 0; c < x.cols(); ++c) sum += std::exp(xr[c] - mx);
    const S lse = mx + std::log(sum);
    for (std::size_t c = 0; c < x.cols(); ++c) y(t, c) = xr[c] - lse;
  }
  return y;
}

template <class S>
Mat<S> temporal_norm(const Mat<S>& x, const Mat<S>& gain, const Mat<S>& bias,
                     TemporalNormCache<S>* cache) {
  const std::size_t t = x.rows();
  const std::size_t ch = x.cols();
  if (t < 2) throw ShapeError("temporal_norm needs at least 2 time steps, got " + x.shape_str());
  if (gain.rows() != 1 || gain.cols() != ch || !gain.same_shape(bias))
    throw ShapeError("temporal_norm: gain " + gain.shape_str() + " / bias " + bias.shape_str() +
                     " do not fit " + x.shape_str());
  Mat<S> mean = column_sums(x);
  for (std::size_t c = 0; c < ch; ++c) mean(0, c) /= static_cast<S>(t);
  Mat<S> var(1, ch);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t c = 0; c < ch; ++c) {
      const S d = x(i, c) - mean(0, c);
      var(0, c) += d * d;
    }
  Mat<S> inv_std(1, ch);
  for (std::size_t c = 0; c < ch; ++c)
    inv_std(0, c) =
        S{1} / std::sqrt(var(0, c) / static_cast<S>(t) + static_cast<S>(kNormEpsilon));
  Mat<S> xhat(t, ch);
  Mat<S> y(t, ch);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t c = 0; c < ch; ++c) {
      xhat(i, c) = (x(i, c) - mean(0, c)) * inv_std(0, c);
      y(i, c) = gain(0, c) * xhat(i, c) + bias(0, c);
    }
  if (cache) {
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <class S>
void temporal_norm_backward(const TemporalNormCache<S>& cache, const Mat<S>& gain,
                            const Mat<S>& dout, Mat<S>* dx, Mat<S>* dgain, Mat<S>* dbias) {
  const Mat<S>& xhat = cache.normalized;
  require_same_shape(xhat, dout, "temporal_norm_backward");
  const std::size_t t = xhat.rows();
  const std::size_t ch = xhat.cols();
  Mat<S> sum_g(1, ch);
  Mat<S> sum_gx(1, ch);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t c = 0; c < ch; ++c) {
      sum_g(0, c) += dout(i, c);
      sum_gx(0, c) += dout(i, c) * xhat(i, c);
    }
  if (dgain) accumulate(*dgain, sum_gx);
  if (dbias) accumulate(*dbias, sum_g);
  if (!dx) return;
  const S n = static_cast<S>(t);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t c = 0; c < ch; ++c) {
      // d xhat = dout * gain; dx = inv_std / T * (T dxhat - sum dxhat - xhat sum(dxhat xhat))
      const S g = gain(0, c);
      (*dx)(i, c) += cache.inv_std(0, c) / n *
                     (n * dout(i, c) * g - sum_g(0, c) * g - xhat(i, c) * sum_gx(0, c) * g);
    }
}

template <class S>
Mat<S> concat_cols(const Mat<S>& a, const Mat<S>& b) {
  if (a.rows() != b.rows())
    throw ShapeError("concat_cols: row counts differ, " + a.shape_str() + " vs " + b.shape_str());
  Mat<S> out(a.rows(), a.cols() + b.cols());
  for (std::size_t t = 0; t < a.rows(); ++t) {
    std::copy(a.row_ptr(t), a.row_ptr(t) + a.cols(), out.row_ptr(t));
    std::copy(b.row_ptr(t), b.row_ptr(t) + b.cols(), out.row_ptr(t) + a.cols());
  }
  return out;
}

template <class S>
void accumulate(Mat<S>& target, const Mat<S>& delta) {
  require_same_shape(target, delta, "accumulate");
  for (std::size_t i = 0; i < target.size(); ++i) target.data()[i] += delta.data()[i];
}

#define MSAST_INSTANTIATE_KERNELS(S)                                                           \
  template Mat<S> matmul(const Mat<S>&, const Mat<S>&);                                        \
  template void matmul_acc(const Mat<S>&, const Mat<S>&, Mat<S>&);                             \
  template void matmul_backward(const Mat<S>&, const Mat<S>&, const Mat<S>&, Mat<S>*,          \
                                Mat<S>*);                                                      \
  template Mat<S> transpose(const Mat<S>&);                                                    \
  template Mat<S> add(const Mat<S>&, const Mat<S>&);                                           \
  template Mat<S> add_row_bias(const Mat<S>&, const Mat<S>&);                                  \
  template Mat<S> column_sums(const Mat<S>&);                                                  \
  template Mat<S> relu(const Mat<S>&);                                                         \
  template Mat<S> relu_backward(const Mat<S>&, const Mat<S>&);                                 \
  template DropoutResult<S> dropout(const Mat<S>&, double, Rng&, bool);                        \
  template Mat<S> dilated_conv1d(const Mat<S>&, const Mat<S>&, const Mat<S>&, std::size_t,     \
                                 std::size_t, ConvMode);                                       \
  template void dilated_conv1d_backward(const Mat<S>&, const Mat<S>&, std::size_t,             \
                                        std::size_t, ConvMode, const Mat<S>&, Mat<S>*,         \
                                        Mat<S>*, Mat<S>*);                                     \
  template Mat<S> softmax_rows(const Mat<S>&);                                                 \
  template Mat<S> softmax_rows_backward(const Mat<S>&, const Mat<S>&);                         \
  template Mat<S> log_softmax_rows(const Mat<S>&);                                             \
  template Mat<S> temporal_norm(const Mat<S>&, const Mat<S>&, const Mat<S>&,                   \
                                TemporalNormCache<S>*);                                        \
  template void temporal_norm_backward(const TemporalNormCache<S>&, const Mat<S>&,             \
                                       const Mat<S>&, Mat<S>*, Mat<S>*, Mat<S>*);              \
  template Mat<S> concat_cols(const Mat<S>&, const Mat<S>&);                                   \
  template void accumulate(Mat<S>&, const Mat<S>&);

MSAST_INSTANTIATE_KERNELS(float)
MSAST_INSTANTIATE_KERNELS(double)

#undef MSAST_INSTANTIATE_KERNELS

}  // namespace msast::kernels
