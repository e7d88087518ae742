#include "dualcycle/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dualcycle/errors.hpp"

namespace dualcycle {

namespace {

void require_step(const NoiseSchedule& sched, int t, const char* what) {
  if (t < 1 || t > sched.steps) {
    throw std::invalid_argument(std::string(what) + ": step " + std::to_string(t) +
                                " outside [1, " + std::to_string(sched.steps) + "]");
  }
}

// sqrt(1 - ab_{t-1} - sigma_t^2), clamped against tiny negative rounding.
double head_coeff(const NoiseSchedule& sched, int t) {
  const double v = 1.0 - sched.alpha_bar[t - 1] - sched.sigma[t] * sched.sigma[t];
  return std::sqrt(std::max(0.0, v));
}

}  // namespace

StepCoeffs step_coeffs(const NoiseSchedule& sched, int t) {
  require_step(sched, t, "step_coeffs");
  const double ab_prev = sched.alpha_bar[t - 1];
  const double ab = sched.alpha_bar[t];
  StepCoeffs c;
  c.a = std::sqrt(ab_prev / ab);
  c.b = head_coeff(sched, t) - std::sqrt(ab_prev * (1.0 - ab) / ab);
  return c;
}

ImageTensor mean_from_clean_estimate(const ImageTensor& xt, const ImageTensor& x0_hat, int t,
                                     const NoiseSchedule& sched) {
  require_step(sched, t, "mean_from_clean_estimate");
  require_same_shape(xt, x0_hat, "mean_from_clean_estimate");
  const double ab_prev = sched.alpha_bar[t - 1];
  const double ab = sched.alpha_bar[t];
  const double sr_ab = std::sqrt(ab);
  const double noise_scale = std::sqrt(1.0 - ab);
  const double c_head = head_coeff(sched, t);
  // mean = sqrt(ab_prev) x0_hat + c_head * (xt - sqrt(ab) x0_hat) / sqrt(1 - ab)
  const double w_x0 = std::sqrt(ab_prev) - c_head * sr_ab / noise_scale;
  const double w_xt = c_head / noise_scale;
  ImageTensor out(xt.height, xt.width, xt.channels);
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = w_x0 * x0_hat.data[i] + w_xt * xt.data[i];
  }
  return out;
}

ImageTensor forward_sample(const ImageTensor& x0, int t, const NoiseSchedule& sched, RandomStream& rng) {
  require_step(sched, t, "forward_sample");
  const double ab = sched.alpha_bar[t];
  const double sr_ab = std::sqrt(ab);
  const double noise = std::sqrt(1.0 - ab);
  ImageTensor out(x0.height, x0.width, x0.channels);
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = sr_ab * x0.data[i] + noise * rng.normal();
  }
  return out;
}

Trajectory forward_trajectory(const ImageTensor& x0, const NoiseSchedule& sched, RandomStream& rng,
                              int start_step) {
  const int S = start_step < 0 ? sched.steps : start_step;
  require_step(sched, S, "forward_trajectory");
  Trajectory traj;
  traj.x.resize(S + 1);
  traj.x[0] = x0;
  traj.x[S] = forward_sample(x0, S, sched, rng);
  for (int t = S; t >= 2; --t) {
    const double ab_prev = sched.alpha_bar[t - 1];
    const double ab = sched.alpha_bar[t];
    const double c_head = head_coeff(sched, t);
    const double noise_scale = std::sqrt(1.0 - ab);
    const double w_x0 = std::sqrt(ab_prev) - c_head * std::sqrt(ab) / noise_scale;
    const double w_xt = c_head / noise_scale;
    const double sig = sched.sigma[t];
    const ImageTensor& xt = traj.x[t];
    ImageTensor prev(x0.height, x0.width, x0.channels);
    for (size_t i = 0; i < prev.data.size(); ++i) {
      prev.data[i] = w_x0 * x0.data[i] + w_xt * xt.data[i] + sig * rng.normal();
    }
    traj.x[t - 1] = std::move(prev);
  }
  return traj;
}

ImageTensor reverse_step(const ImageTensor& xt, int t, const ImageTensor& mean, const ImageTensor& eps_t,
                         const NoiseSchedule& sched) {
  require_step(sched, t, "reverse_step");
  require_same_shape(xt, mean, "reverse_step");
  require_same_shape(mean, eps_t, "reverse_step");
  const double sig = sched.sigma[t];
  ImageTensor out(mean.height, mean.width, mean.channels);
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = mean.data[i] + sig * eps_t.data[i];
  }
  return out;
}

ImageTensor guided_mean(const ImageTensor& xt, int t, const Condition& c, const Denoiser& den,
                        const NoiseSchedule& sched, double scale) {
  require_step(sched, t, "guided_mean");
  if (scale == 1.0) return den.reverse_mean(xt, t, c);
  if (scale == 0.0) return den.reverse_mean(xt, t, Condition{});
  const ImageTensor mean_c = den.reverse_mean(xt, t, c);
  const ImageTensor mean_u = den.reverse_mean(xt, t, Condition{});
  require_same_shape(mean_c, mean_u, "guided_mean");
  const StepCoeffs sc = step_coeffs(sched, t);
  ImageTensor out(xt.height, xt.width, xt.channels);
  for (size_t i = 0; i < out.data.size(); ++i) {
    const double eps_c = (mean_c.data[i] - sc.a * xt.data[i]) / sc.b;
    const double eps_u = (mean_u.data[i] - sc.a * xt.data[i]) / sc.b;
    const double eps = eps_u + scale * (eps_c - eps_u);
    out.data[i] = sc.a * xt.data[i] + sc.b * eps;
  }
  return out;
}

ImageTensor decode(const LatentCode& z, const Condition& c, const Denoiser& den, const NoiseSchedule& sched,
                   double scale) {
  return decode_tail(decode_head(z, c, z.start_step(), den, sched, scale),
                     std::span<const ImageTensor>(z.eps.data(), z.eps.size()), c, z.start_step(), den,
                     sched, scale);
}

ImageTensor decode_head(const LatentCode& z, const Condition& c, int k, const Denoiser& den,
                        const NoiseSchedule& sched, double scale) {
  const int S = z.start_step();
  if (S < 1 || S > sched.steps) {
    throw std::invalid_argument("decode_head: latent has " + std::to_string(S) +
                                " noise entries, schedule has " + std::to_string(sched.steps) + " steps");
  }
  if (k < 1 || k > S) {
    throw std::invalid_argument("decode_head: split step " + std::to_string(k) + " outside [1, " +
                                std::to_string(S) + "]");
  }
  ImageTensor x = z.x_start;
  for (int t = S; t > k; --t) {
    const ImageTensor mean = guided_mean(x, t, c, den, sched, scale);
    x = reverse_step(x, t, mean, z.eps[t - 1], sched);
  }
  return x;
}

ImageTensor decode_tail(const ImageTensor& xk, std::span<const ImageTensor> eps_1k, const Condition& c,
                        int k, const Denoiser& den, const NoiseSchedule& sched, double scale) {
  if (k < 1 || k > sched.steps) {
    throw std::invalid_argument("decode_tail: split step " + std::to_string(k) + " outside [1, " +
                                std::to_string(sched.steps) + "]");
  }
  if (static_cast<int>(eps_1k.size()) != k) {
    throw std::invalid_argument("decode_tail: need exactly " + std::to_string(k) + " noise entries, got " +
                                std::to_string(eps_1k.size()));
  }
  ImageTensor x = xk;
  for (int t = k; t >= 1; --t) {
    const ImageTensor mean = guided_mean(x, t, c, den, sched, scale);
    x = reverse_step(x, t, mean, eps_1k[t - 1], sched);
  }
  return x;
}

EncodeResult dpm_encode(const ImageTensor& x0, const Condition& c, const Denoiser& den,
                        const NoiseSchedule& sched, double scale, RandomStream& rng, int noise_step) {
  const int S = noise_step < 0 ? sched.steps : noise_step;
  require_step(sched, S, "dpm_encode");
  EncodeResult result;
  result.trajectory = forward_trajectory(x0, sched, rng, S);
  result.z.x_start = result.trajectory.x[S];
  result.z.eps.resize(S);
  for (int t = S; t >= 1; --t) {
    const ImageTensor mean = guided_mean(result.trajectory.x[t], t, c, den, sched, scale);
    const double sig = sched.sigma[t];
    const ImageTensor& prev = result.trajectory.x[t - 1];
    ImageTensor eps(x0.height, x0.width, x0.channels);
    if (sig == 0.0) {
      double resid = 0.0;
      for (size_t i = 0; i < eps.data.size(); ++i) {
        resid = std::max(resid, std::fabs(prev.data[i] - mean.data[i]));
      }
      if (resid > 1e-6) {
        throw EncodeSingularityError("dpm_encode: sigma[" + std::to_string(t) +
                                     "] = 0 but the step residual is " + std::to_string(resid) +
                                     "; this trajectory cannot be represented at eta = 0");
      }
      // eps already zero-initialized
    } else {
      for (size_t i = 0; i < eps.data.size(); ++i) {
        eps.data[i] = (prev.data[i] - mean.data[i]) / sig;
      }
    }
    result.z.eps[t - 1] = std::move(eps);
  }
  return result;
}

}  // namespace dualcycle
