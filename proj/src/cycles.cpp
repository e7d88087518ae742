#include "dualcycle/cycles.hpp"

namespace dualcycle {

ScCycleResult sc_cycle(const ImageTensor& x0_src, const Condition& c_src, const Condition& c_tgt,
                       const Denoiser& den, const NoiseSchedule& sched, double enc_scale, double dec_scale,
                       int noise_step, RandomStream& rng) {
  EncodeResult enc = dpm_encode(x0_src, c_src, den, sched, enc_scale, rng, noise_step);
  ScCycleResult result;
  result.x0_target = decode(enc.z, c_tgt, den, sched, dec_scale);
  result.z_source = std::move(enc.z);
  result.source_trajectory = std::move(enc.trajectory);
  return result;
}

CycleOutput be_cycle(const ImageTensor& x0_src, const Condition& c_src, const Condition& c_tgt,
                     const Denoiser& den, const NoiseSchedule& sched, double enc_scale, double dec_scale,
                     int noise_step, RandomStream& rng) {
  ScCycleResult fwd = sc_cycle(x0_src, c_src, c_tgt, den, sched, enc_scale, dec_scale, noise_step, rng);
  EncodeResult inv = dpm_encode(fwd.x0_target, c_tgt, den, sched, enc_scale, rng, noise_step);
  CycleOutput out;
  out.x0_inv = decode(inv.z, c_src, den, sched, dec_scale);
  out.x0_target = std::move(fwd.x0_target);
  out.z_source = std::move(fwd.z_source);
  out.source_trajectory = std::move(fwd.source_trajectory);
  out.z_target = std::move(inv.z);
  return out;
}

}  // namespace dualcycle
