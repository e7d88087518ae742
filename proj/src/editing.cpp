#include "dualcycle/editing.hpp"

#include <stdexcept>
#include <utility>

namespace dualcycle {

namespace {

// Overwrites the mask = 0 pixels of `state` with the source values. A plain
// branch per pixel (not a lerp) so that an all-ones mask leaves `state`
// bitwise untouched and an all-zero mask copies the source bitwise.
void pin_outside_mask(ImageTensor& state, const ImageTensor& source, const EditMask& mask) {
  for (int y = 0; y < state.height; ++y)
    for (int x = 0; x < state.width; ++x) {
      if (mask.at(y, x)) continue;
      for (int c = 0; c < state.channels; ++c) state.at(y, x, c) = source.at(y, x, c);
    }
}

}  // namespace

ImageTensor masked_edit(const LatentCode& z_source, const Trajectory& source_path,
                        const EditPlan& plan, const Denoiser& den, const NoiseSchedule& sched,
                        RandomStream* rng) {
  const int k = plan.blend_step;
  const int noise_step = plan.noise_step;
  if (k < 1 || k > noise_step || noise_step > sched.steps)
    throw std::invalid_argument("masked_edit requires 1 <= blend_step <= noise_step <= steps");
  if (z_source.start_step() != noise_step)
    throw std::invalid_argument("latent code depth disagrees with noise_step");
  if (source_path.start_step() < k)
    throw std::invalid_argument("source path is shallower than blend_step");
  const ImageTensor& x0_source = source_path.x[0];
  if (plan.mask.rows != x0_source.height || plan.mask.cols != x0_source.width)
    throw std::invalid_argument("mask geometry disagrees with the image");
  if (plan.blend == BlendMode::resample && rng == nullptr)
    throw std::invalid_argument("resample blending needs a random stream");

  Trajectory resampled;
  const Trajectory* source = &source_path;
  if (plan.blend == BlendMode::resample) {
    resampled = forward_trajectory(x0_source, sched, *rng, k);
    source = &resampled;
  }

  ImageTensor x = decode_head(z_source, plan.c_target, k, den, sched, plan.guidance_scale);
  pin_outside_mask(x, source->x[k], plan.mask);
  for (int t = k; t >= 1; --t) {
    ImageTensor mean = guided_mean(x, t, plan.c_target, den, sched, plan.guidance_scale);
    ImageTensor next = reverse_step(x, t, mean, z_source.eps[t - 1], sched);
    pin_outside_mask(next, source->x[t - 1], plan.mask);
    x = std::move(next);
  }
  return x;
}

ImageTensor masked_edit(const ImageTensor& x0_source, const Condition& c_source,
                        double encode_scale, const EditPlan& plan, const Denoiser& den,
                        const NoiseSchedule& sched, RandomStream& rng) {
  const int noise_step = plan.noise_step > 0 ? plan.noise_step : sched.steps;
  EncodeResult enc = dpm_encode(x0_source, c_source, den, sched, encode_scale, rng, noise_step);
  EditPlan resolved = plan;
  resolved.noise_step = noise_step;
  return masked_edit(enc.z, enc.trajectory, resolved, den, sched, &rng);
}

}  // namespace dualcycle
