#include "msast/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace msast {
namespace {

double evaluate(const ScalarGraph& f) {
  Tape<double> tape(false);
  return tape.value(f(tape))(0, 0);
}

}  // namespace

GradCheckReport finite_diff_check(const ScalarGraph& f, std::span<Param<double>* const> params,
                                  const GradCheckOptions& opts) {
  GradCheckReport rep;

  std::vector<Mat<double>> analytic;
  {
    Tape<double> tape(true);
    const Var loss = f(tape);
    const double base = tape.value(loss)(0, 0);
    if (!std::isfinite(base)) {
      rep.ok = false;
      rep.failure = "non-finite loss at the unperturbed point";
      return rep;
    }
    tape.backward(loss);
    for (Param<double>* p : params) {
      const Mat<double>* g = tape.param_grad(*p);
      analytic.push_back(g ? *g : Mat<double>(p->value.rows(), p->value.cols()));
    }
  }

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Param<double>& p = *params[pi];
    const std::size_t n = p.value.size();
    const std::size_t stride =
        opts.max_entries_per_param == 0 ? 1 : std::max<std::size_t>(1, n / opts.max_entries_per_param);
    for (std::size_t i = 0; i < n; i += stride) {
      double& slot = p.value.data()[i];
      const double saved = slot;
      slot = saved + opts.eps;
      const double up = evaluate(f);
      slot = saved - opts.eps;
      const double down = evaluate(f);
      slot = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        rep.ok = false;
        rep.failure = "non-finite loss when perturbing " + p.name + "[" + std::to_string(i) + "]";
        return rep;
      }
      const double numeric = (up - down) / (2.0 * opts.eps);
      const double a = analytic[pi].data()[i];
      const double abs_err = std::abs(a - numeric);
      const double rel =
          abs_err / std::max({std::abs(a), std::abs(numeric), opts.denominator_floor});
      ++rep.entries_checked;
      rep.max_abs_error = std::max(rep.max_abs_error, abs_err);
      if (rel > rep.max_rel_error) {
        rep.max_rel_error = rel;
        rep.worst_param = p.name;
        rep.worst_index = i;
        rep.worst_analytic = a;
        rep.worst_numeric = numeric;
      }
    }
  }
  return rep;
}

}  // namespace msast
