#pragma once

#include "dualcycle/diffusion.hpp"

namespace dualcycle {

struct ScCycleResult {
  ImageTensor x0_target;
  LatentCode z_source;
  Trajectory source_trajectory;
};

struct CycleOutput {
  ImageTensor x0_target;
  ImageTensor x0_inv;
  LatentCode z_source;
  Trajectory source_trajectory;
  LatentCode z_target;
};

// Source-conditioned cycle: encode x0_src under c_src up to noise_step
// (scale enc_scale), then decode the latent under c_tgt at dec_scale.
// With c_tgt = c_src and dec_scale = enc_scale the decode retraces the
// encoder and returns x0_src.
ScCycleResult sc_cycle(const ImageTensor& x0_src, const Condition& c_src, const Condition& c_tgt,
                       const Denoiser& den, const NoiseSchedule& sched, double enc_scale, double dec_scale,
                       int noise_step, RandomStream& rng);

// Back-edit cycle: the forward sc_cycle above, then the inverted pass with
// the roles of the conditions swapped. x0_target is re-encoded under c_tgt
// (same noise_step and enc_scale) and decoded under c_src at dec_scale,
// giving x0_inv. Differences between x0_target and x0_inv isolate what the
// target condition actually changed: anything the model drags along in both
// directions (condition-correlated content) appears in both images and
// cancels out of the comparison.
CycleOutput be_cycle(const ImageTensor& x0_src, const Condition& c_src, const Condition& c_tgt,
                     const Denoiser& den, const NoiseSchedule& sched, double enc_scale, double dec_scale,
                     int noise_step, RandomStream& rng);

}  // namespace dualcycle
