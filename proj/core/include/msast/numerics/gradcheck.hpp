#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "msast/numerics/param.hpp"
#include "msast/numerics/tape.hpp"

namespace msast {

struct GradCheckOptions {
  double eps = 1e-4;
  // Denominator floor for the relative error |a - n| / max(|a|, |n|, floor).
  double denominator_floor = 1e-6;
  // 0 checks every entry; otherwise a deterministic stride subsample per param.
  std::size_t max_entries_per_param = 0;
};

struct GradCheckReport {
  bool ok = true;              // false when any evaluation was non-finite
  std::string failure;         // names the offending parameter
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
};

/// Builds a scalar (1x1) loss on the given tape from the bound parameters.
using ScalarGraph = std::function<Var(Tape<double>&)>;

/// Compares analytic gradients of `f` against central differences
/// (f(θ+ε) - f(θ-ε)) / 2ε for every entry of every parameter.
/// `f` must be deterministic. Parameter values are restored on return.
GradCheckReport finite_diff_check(const ScalarGraph& f, std::span<Param<double>* const> params,
                                  const GradCheckOptions& opts = {});

}  // namespace msast
