#include "msast/training/adam.hpp"

#include <cmath>
#include <string>

#include "msast/errors.hpp"

namespace msast::training {

template <class S>
AdamState<S> AdamState<S>::zeros_like(std::span<const Param<S>> params) {
  AdamState st;
  for (const auto& p : params) {
    st.m.emplace_back(p.value.rows(), p.value.cols());
    st.v.emplace_back(p.value.rows(), p.value.cols());
  }
  return st;
}

template <class S>
void adam_step(std::span<Param<S>> params, AdamState<S>& state, const AdamConfig& cfg) {
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw ShapeError("adam_step: optimizer state tracks " + std::to_string(state.m.size()) +
                     " parameters, got " + std::to_string(params.size()));
  for (const auto& p : params) {
    if (!p.grad.all_finite()) throw NumericError("non-finite gradient in parameter " + p.name);
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param<S>& p = params[i];
    require_same_shape(p.value, state.m[i], "adam_step moment");
    S* theta = p.value.data();
    const S* g = p.grad.data();
    S* m = state.m[i].data();
    S* v = state.v[i].data();
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double gj = g[j];
      const double mj = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
      const double vj = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
      m[j] = static_cast<S>(mj);
      v[j] = static_cast<S>(vj);
      const double update = cfg.learning_rate * (mj / bc1) / (std::sqrt(vj / bc2) + cfg.epsilon);
      theta[j] = static_cast<S>(theta[j] - update);
    }
    p.zero_grad();
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(std::span<Param<float>>, AdamState<float>&, const AdamConfig&);
template void adam_step(std::span<Param<double>>, AdamState<double>&, const AdamConfig&);

}  // namespace msast::training
