#pragma once

#include <cstdint>
#include <random>

#include "msast/numerics/matrix.hpp"

// Forward kernels and their analytic backward passes.
//
// Every kernel computes each output row with a reduction order that depends
// only on the row's own inputs and the operand widths, never on the number of
// rows. A prefix of a sequence therefore yields bit-identical rows to the full
// sequence wherever the operation is causal.
namespace msast::kernels {

using Rng = std::mt19937_64;

enum class ConvMode : std::uint8_t { kSymmetric = 0, kCausal = 1 };

inline constexpr double kNormEpsilon = 1e-5;

// ---- matmul ---------------------------------------------------------------

template <class S>
Mat<S> matmul(const Mat<S>& a, const Mat<S>& b);

// out += a * b. Shapes must already agree.
template <class S>
void matmul_acc(const Mat<S>& a, const Mat<S>& b, Mat<S>& out);

// da += dout * b^T, db += a^T * dout. Either target may be null.
template <class S>
void matmul_backward(const Mat<S>& a, const Mat<S>& b, const Mat<S>& dout, Mat<S>* da,
                     Mat<S>* db);

template <class S>
Mat<S> transpose(const Mat<S>& a);

// ---- elementwise ----------------------------------------------------------

template <class S>
Mat<S> add(const Mat<S>& a, const Mat<S>& b);

// Adds a 1xC bias row to every row of x.
template <class S>
Mat<S> add_row_bias(const Mat<S>& x, const Mat<S>& bias);

template <class S>
Mat<S> column_sums(const Mat<S>& x);

template <class S>
Mat<S> relu(const Mat<S>& x);

template <class S>
Mat<S> relu_backward(const Mat<S>& x, const Mat<S>& dout);

template <class S>
struct DropoutResult {
  Mat<S> out;
  Mat<S> mask;  // 0 or 1/(1-rate) per entry; all ones when inactive
};

// Inverted dropout. Identity when !training or rate == 0; the rng is not
// advanced in that case.
template <class S>
DropoutResult<S> dropout(const Mat<S>& x, double rate, Rng& rng, bool training);

// ---- dilated temporal convolution ------------------------------------------

// Weight layout: (K * Cin) x Cout; tap k occupies rows [k*Cin, (k+1)*Cin).
// Bias: 1 x Cout. Zero padding outside [0, T).
//   symmetric: y_t = b + sum_k W_k . x_{t + (k - K/2) d}
//   causal:    y_t = b + sum_k W_k . x_{t - (K - 1 - k) d}
template <class S>
Mat<S> dilated_conv1d(const Mat<S>& x, const Mat<S>& w, const Mat<S>& b, std::size_t kernel,
                      std::size_t dilation, ConvMode mode);

template <class S>
void dilated_conv1d_backward(const Mat<S>& x, const Mat<S>& w, std::size_t kernel,
                             std::size_t dilation, ConvMode mode, const Mat<S>& dout, Mat<S>* dx,
                             Mat<S>* dw, Mat<S>* db);

// Signed time offset of tap k.
std::ptrdiff_t conv_tap_offset(std::size_t k, std::size_t kernel, std::size_t dilation,
                               ConvMode mode);

// ---- softmax ----------------------------------------------------------------

template <class S>
Mat<S> softmax_rows(const Mat<S>& x);

// Given y = softmax_rows(x) and dL/dy, returns dL/dx.
template <class S>
Mat<S> softmax_rows_backward(const Mat<S>& y, const Mat<S>& dout);

template <class S>
Mat<S> log_softmax_rows(const Mat<S>& x);

// ---- temporal normalization ---------------------------------------------------

template <class S>
struct TemporalNormCache {
  Mat<S> normalized;  // (x - mean) / sqrt(var + eps)
  Mat<S> inv_std;     // 1 x C
};

// Per-channel normalization with mean and variance over the whole time axis.
template <class S>
Mat<S> temporal_norm(const Mat<S>& x, const Mat<S>& gain, const Mat<S>& bias,
                     TemporalNormCache<S>* cache = nullptr);

template <class S>
void temporal_norm_backward(const TemporalNormCache<S>& cache, const Mat<S>& gain,
                            const Mat<S>& dout, Mat<S>* dx, Mat<S>* dgain, Mat<S>* dbias);

// ---- misc -----------------------------------------------------------------

template <class S>
Mat<S> concat_cols(const Mat<S>& a, const Mat<S>& b);

template <class S>
void accumulate(Mat<S>& target, const Mat<S>& delta);

}  // namespace msast::kernels
