#pragma once

#include "dualcycle/condition.hpp"
#include "dualcycle/image.hpp"

namespace dualcycle {

// A reverse-process model: given the state x_t at step t and a condition,
// returns the mean of x_{t-1}. The step noise scale sigma[t] comes from the
// schedule the model was built against, so the reverse transition is
// N(reverse_mean(x_t, t, c), sigma[t]^2 I).
//
// Implementations must be deterministic and safe to call concurrently.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual ImageTensor reverse_mean(const ImageTensor& xt, int t, const Condition& c) const = 0;
};

}  // namespace dualcycle
