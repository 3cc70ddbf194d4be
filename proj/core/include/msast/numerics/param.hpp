#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msast/numerics/matrix.hpp"

namespace msast {

/// A learned tensor. `dims` records the logical shape (rank 0..3) used by the
/// checkpoint format; `value` holds it flattened to rows x cols.
template <class S>
struct Param {
  std::string name;
  std::vector<std::uint32_t> dims;
  Mat<S> value;
  Mat<S> grad;

  Param() = default;
  Param(std::string n, std::vector<std::uint32_t> d, std::size_t rows, std::size_t cols)
      : name(std::move(n)), dims(std::move(d)), value(rows, cols), grad(rows, cols) {}

  void zero_grad() { grad.fill(S{0}); }

  template <class U>
  Param<U> cast() const {
    Param<U> p;
    p.name = name;
    p.dims = dims;
    p.value = value.template cast<U>();
    p.grad = grad.template cast<U>();
    return p;
  }
};

}  // namespace msast
