#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "msast/numerics/kernels.hpp"
#include "msast/numerics/param.hpp"

namespace msast {

/// Handle to a node on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Reverse-mode autodiff record over dense matrices.
///
/// Values are computed eagerly. When recording is off (inference) no backward
/// closures are kept and gradients cannot be requested.
template <class S>
class Tape {
 public:
  // Called with the tape and the node's own handle during backward().
  using Backward = std::function<void(Tape&, Var self)>;

  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }

  // Leaf that never receives a gradient.
  Var constant(Mat<S> value);
  // Leaf that refers to caller-owned storage; it must outlive the tape.
  Var constant_ref(const Mat<S>& value);
  // Leaf bound to a parameter; the same Param always maps to the same node.
  Var param(const Param<S>& p);

  // Appends an interior node computed from `parents`.
  Var push(Mat<S> value, std::initializer_list<Var> parents, Backward backward);
  Var push(Mat<S> value, std::span<const Var> parents, Backward backward);

  const Mat<S>& value(Var v) const;
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  // Gradient accumulator of v, zero-initialized on first access.
  Mat<S>& grad(Var v);

  // Seeds d(root)/d(root) = 1 on a 1x1 node and runs every closure in reverse.
  void backward(Var root);

  // Gradient of a bound parameter, or nullptr if it was not used.
  const Mat<S>* param_grad(const Param<S>& p) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat<S> owned;
    const Mat<S>* external = nullptr;
    Mat<S> grad;
    bool needs_grad = false;
    Backward backward;
  };

  bool recording_;
  std::vector<Node> nodes_;
  std::unordered_map<const Param<S>*, std::size_t> param_nodes_;
};

/// Differentiable operations recorded on a Tape.
namespace ad {

using kernels::ConvMode;
using kernels::Rng;

template <class S>
Var matmul(Tape<S>& tp, Var a, Var b);
template <class S>
Var add(Tape<S>& tp, Var a, Var b);
template <class S>
Var add_row_bias(Tape<S>& tp, Var x, Var bias);
// x * w + bias for a 1x1 (per-frame linear) projection.
template <class S>
Var linear(Tape<S>& tp, Var x, Var w, Var bias);
template <class S>
Var relu(Tape<S>& tp, Var x);
template <class S>
Var dropout(Tape<S>& tp, Var x, double rate, Rng& rng, bool training);
template <class S>
Var conv1d(Tape<S>& tp, Var x, Var w, Var b, std::size_t kernel, std::size_t dilation,
           ConvMode mode);
template <class S>
Var temporal_norm(Tape<S>& tp, Var x, Var gain, Var bias);
template <class S>
Var softmax_rows(Tape<S>& tp, Var x);
template <class S>
Var concat_cols(Tape<S>& tp, Var a, Var b);
// sum(x .* weights), a 1x1 node. Used to reduce test outputs to a scalar.
template <class S>
Var weighted_sum(Tape<S>& tp, Var x, const Mat<S>& weights);
// Sum of 1x1 nodes.
template <class S>
Var sum_scalars(Tape<S>& tp, std::span<const Var> xs);
template <class S>
Var scale(Tape<S>& tp, Var x, S factor);

}  // namespace ad
}  // namespace msast
