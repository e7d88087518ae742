#pragma once

#include <span>
#include <vector>

#include "dualcycle/denoiser.hpp"
#include "dualcycle/image.hpp"
#include "dualcycle/rng.hpp"
#include "dualcycle/schedule.hpp"

namespace dualcycle {

// States x[0..S] of one diffusion path; x[0] is the clean image and
// S = start_step() is the most-noised state the path reaches.
struct Trajectory {
  std::vector<ImageTensor> x;
  int start_step() const { return static_cast<int>(x.size()) - 1; }
};

// Invertible latent representation of an image under a given condition:
// the terminal state x_start at step S plus the per-step noises eps[1..S]
// (stored as eps[t-1] for step t). Decoding replays
//   x_{t-1} = reverse_mean(x_t, t, c) + sigma[t] * eps[t]
// from t = S down to 1, which reproduces the encoded image exactly when the
// same denoiser, condition, and guidance scale are used.
struct LatentCode {
  ImageTensor x_start;
  std::vector<ImageTensor> eps;
  int start_step() const { return static_cast<int>(eps.size()); }
};

struct EncodeResult {
  LatentCode z;
  Trajectory trajectory;
};

// Per-step affine relation between the reverse mean and the implied noise
// estimate: mean = a * x_t + b * eps_hat. b is nonzero for every valid step,
// so the relation can be inverted.
struct StepCoeffs {
  double a = 0.0;
  double b = 0.0;
};
StepCoeffs step_coeffs(const NoiseSchedule& sched, int t);

// Reverse mean for step t implied by a clean-image estimate x0_hat:
//   eps_hat = (x_t - sqrt(ab_t) x0_hat) / sqrt(1 - ab_t)
//   mean    = sqrt(ab_{t-1}) x0_hat + sqrt(1 - ab_{t-1} - sigma_t^2) eps_hat
ImageTensor mean_from_clean_estimate(const ImageTensor& xt, const ImageTensor& x0_hat, int t,
                                     const NoiseSchedule& sched);

// One draw from the forward marginal q(x_t | x0) = N(sqrt(ab_t) x0, (1 - ab_t) I).
ImageTensor forward_sample(const ImageTensor& x0, int t, const NoiseSchedule& sched, RandomStream& rng);

// One path x[0..start_step] through the noising process, sampled so that the
// joint matches the posterior family the eta-schedule's sampler inverts:
// x_S is drawn from the marginal q(x_S | x0) and each earlier state from
//   x_{t-1} | x_t, x0 ~ N(sqrt(ab_{t-1}) x0
//                          + sqrt(1 - ab_{t-1} - sigma_t^2) (x_t - sqrt(ab_t) x0)/sqrt(1 - ab_t),
//                        sigma_t^2 I),
// with x[0] = x0. Every marginal is q(x_t | x0); at eta = 1 the joint equals
// the ancestral forward chain. (A plain step-by-step forward walk has
// conditional spread ~sigma[t]/eta around the optimal reverse mean, which
// would make the encoded noises blow up as eta shrinks; this family keeps
// them near standard normal.)
Trajectory forward_trajectory(const ImageTensor& x0, const NoiseSchedule& sched, RandomStream& rng,
                              int start_step = -1 /* default: sched.steps */);

// x_{t-1} = mean + sigma[t] * eps_t. xt participates only in shape checks.
ImageTensor reverse_step(const ImageTensor& xt, int t, const ImageTensor& mean, const ImageTensor& eps_t,
                         const NoiseSchedule& sched);

// Classifier-free combination in noise space: the conditional and
// unconditional means are mapped to their implied noise estimates,
// eps = eps_u + scale * (eps_c - eps_u), and the result mapped back to a
// mean. scale 0 and 1 short-circuit to the single matching denoiser call,
// so encoding at scale 1 costs one model evaluation per step.
ImageTensor guided_mean(const ImageTensor& xt, int t, const Condition& c, const Denoiser& den,
                        const NoiseSchedule& sched, double scale);

// Full reverse chain from z.start_step() down to 0.
ImageTensor decode(const LatentCode& z, const Condition& c, const Denoiser& den, const NoiseSchedule& sched,
                   double scale);

// Reverse chain stopped early: consumes eps[S..k+1] and returns x_k.
// k = start_step returns z.x_start unchanged.
ImageTensor decode_head(const LatentCode& z, const Condition& c, int k, const Denoiser& den,
                        const NoiseSchedule& sched, double scale);

// Remainder of the chain: starts at x_k, consumes eps_1k (exactly k entries,
// eps_1k[t-1] for step t) and returns x_0. decode_tail(decode_head(z, k), ...)
// reproduces decode(z) bit for bit, for any split point k.
ImageTensor decode_tail(const ImageTensor& xk, std::span<const ImageTensor> eps_1k, const Condition& c,
                        int k, const Denoiser& den, const NoiseSchedule& sched, double scale);

// Stochastic encoder: samples a forward trajectory up to noise_step, then
// recovers the per-step noises that make the reverse chain retrace it:
//   eps[t] = (x[t-1] - guided_mean(x[t], t, c, scale)) / sigma[t]
// decode(z, c, ...) with the same denoiser and scale reproduces x0 exactly.
// If sigma[t] = 0 (eta = 0) the step carries no noise slot: eps[t] is set to
// zero when the residual is at most 1e-6 in magnitude, otherwise
// EncodeSingularityError is raised.
EncodeResult dpm_encode(const ImageTensor& x0, const Condition& c, const Denoiser& den,
                        const NoiseSchedule& sched, double scale, RandomStream& rng,
                        int noise_step = -1 /* default: sched.steps */);

}  // namespace dualcycle
