#include "msast/numerics/tape.hpp"

#include <string>

#include "msast/errors.hpp"

namespace msast {

template <class S>
Var Tape<S>::constant(Mat<S> value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <class S>
Var Tape<S>::constant_ref(const Mat<S>& value) {
  Node n;
  n.external = &value;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <class S>
Var Tape<S>::param(const Param<S>& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
  Node n;
  n.external = &p.value;
  n.needs_grad = recording_;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var{nodes_.size() - 1};
}

template <class S>
Var Tape<S>::push(Mat<S> value, std::initializer_list<Var> parents, Backward backward) {
  return push(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
              std::move(backward));
}

template <class S>
Var Tape<S>::push(Mat<S> value, std::span<const Var> parents, Backward backward) {
  Node n;
  n.owned = std::move(value);
  if (recording_) {
    for (Var p : parents) n.needs_grad = n.needs_grad || nodes_[p.id].needs_grad;
    if (n.needs_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <class S>
const Mat<S>& Tape<S>::value(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.external ? *n.external : n.owned;
}

template <class S>
Mat<S>& Tape<S>::grad(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.grad.empty()) {
    const Mat<S>& val = n.external ? *n.external : n.owned;
    n.grad.resize(val.rows(), val.cols());
  }
  return n.grad;
}

template <class S>
void Tape<S>::backward(Var root) {
  if (!recording_) throw LogicError("backward called on a non-recording tape");
  const Mat<S>& r = value(root);
  if (r.rows() != 1 || r.cols() != 1)
    throw ShapeError("backward root must be 1x1, got " + r.shape_str());
  grad(root)(0, 0) = S{1};
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, Var{i});
  }
}

template <class S>
const Mat<S>* Tape<S>::param_grad(const Param<S>& p) const {
  auto it = param_nodes_.find(&p);
  if (it == param_nodes_.end()) return nullptr;
  const Node& n = nodes_[it->second];
  return n.grad.empty() ? nullptr : &n.grad;
}

template class Tape<float>;
template class Tape<double>;

}  // namespace msast
