#pragma once

#include <vector>

namespace dualcycle {

// Variance schedule for a T-step diffusion chain, indexed 1..T (index 0 is
// the clean-image boundary).
//
//   alpha_bar[t] = alpha_bar[t-1] * (1 - beta[t])
//   sigma[t]     = eta * sqrt((1 - alpha_bar[t-1]) / (1 - alpha_bar[t]))
//                      * sqrt(1 - alpha_bar[t] / alpha_bar[t-1])
//
// alpha_bar[0] is seeded at 1 - beta[0] with a virtual rate beta[0] =
// beta_min rather than exactly 1. With alpha_bar[0] = 1 the first reverse
// step has sigma[1] = 0 for every eta, which collapses that step to its mean
// and destroys the stochastic encoder's ability to represent the final
// residual; the small virtual rate keeps sigma[1] > 0 whenever eta > 0 while
// preserving every per-step identity (in particular, at eta = 1 sigma[t]
// equals the ancestral posterior standard deviation for all t).
struct NoiseSchedule {
  int steps = 0;  // T
  double eta = 0.0;
  std::vector<double> beta;       // size T+1, beta[0] is the virtual pre-step rate
  std::vector<double> alpha_bar;  // size T+1
  std::vector<double> sigma;      // size T+1, sigma[0] unused (0)
};

// Linear beta ramp from beta_min at t=1 to beta_max at t=T.
// Throws std::invalid_argument for steps < 1, betas outside (0, 1),
// beta_min > beta_max, or eta outside [0, 1].
NoiseSchedule make_schedule(int steps, double beta_min, double beta_max, double eta);

}  // namespace dualcycle
