#include "omicq/adam.hpp"

#include <cmath>

#include "omicq/errors.hpp"

namespace omicq {

void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state,
                 const AdamOptions& opts) {
  if (params.size() != grads.size()) throw ValidationError("Adam: parameter and gradient sizes differ");
  if (state.t == 0 && state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw ValidationError("Adam: state size mismatch");
  ++state.t;
  const double c1 = 1.0 - std::pow(opts.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(opts.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = opts.beta1 * state.m[i] + (1.0 - opts.beta1) * g;
    state.v[i] = opts.beta2 * state.v[i] + (1.0 - opts.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= opts.lr * mhat / (std::sqrt(vhat) + opts.eps);
  }
}

}  // namespace omicq
