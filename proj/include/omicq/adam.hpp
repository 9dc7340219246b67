#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace omicq {

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

// One bias-corrected Adam update of `params` in place. The state is sized on
// first use and must keep the same length afterwards.
void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state,
                 const AdamOptions& opts = {});

}  // namespace omicq
