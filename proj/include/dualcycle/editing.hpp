#pragma once

#include "dualcycle/condition.hpp"
#include "dualcycle/diffusion.hpp"
#include "dualcycle/maskgen.hpp"

namespace dualcycle {

// Where the preserved (mask = 0) pixels take their values during the blended
// reverse pass:
//   replay:   the stored source trajectory, so an all-zero mask returns the
//             source image exactly
//   resample: a freshly drawn source path from the same clean image, which
//             decorrelates the preserved region's noise from the edit
enum class BlendMode { replay, resample };

// One masked edit: decode under c_target down to blend_step, swap in the
// source path outside the mask, and keep pinning the preserved pixels to the
// source path on every remaining step so the edit cannot creep outside the
// mask through the denoiser's spatial coupling.
struct EditPlan {
  Condition c_target;
  EditMask mask;  // pixel geometry (image height x width); 1 = editable
  int blend_step = 1;
  int noise_step = 0;
  double guidance_scale = 1.0;
  BlendMode blend = BlendMode::replay;
};

// Runs the plan against an already-encoded source. Requires
// 1 <= blend_step <= noise_step <= sched.steps, z_source encoded exactly to
// noise_step, and source_path at least blend_step states deep (its x[0] is
// the source image). rng may be null in replay mode.
//
// An all-ones mask reproduces the unmasked decode of z_source under
// c_target bit for bit; an all-zero mask in replay mode returns
// source_path.x[0] bit for bit.
ImageTensor masked_edit(const LatentCode& z_source, const Trajectory& source_path,
                        const EditPlan& plan, const Denoiser& den, const NoiseSchedule& sched,
                        RandomStream* rng = nullptr);

// Convenience wrapper: encodes x0_source under c_source first, then runs the
// plan on the fresh latents.
ImageTensor masked_edit(const ImageTensor& x0_source, const Condition& c_source,
                        double encode_scale, const EditPlan& plan, const Denoiser& den,
                        const NoiseSchedule& sched, RandomStream& rng);

}  // namespace dualcycle
