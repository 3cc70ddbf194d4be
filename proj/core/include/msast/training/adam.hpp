#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msast/numerics/param.hpp"

namespace msast::training {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <class S>
struct AdamState {
  std::vector<Mat<S>> m;  // first moments, one per parameter
  std::vector<Mat<S>> v;  // second moments
  std::uint64_t step = 0;

  static AdamState zeros_like(std::span<const Param<S>> params);
};

/// One bias-corrected Adam update over all params, then zeroes their
/// gradients. A non-finite gradient throws NumericError naming the parameter
/// before anything is modified.
template <class S>
void adam_step(std::span<Param<S>> params, AdamState<S>& state, const AdamConfig& cfg);

}  // namespace msast::training
