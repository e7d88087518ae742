// Brute-force oracle for the clean-image posterior mean E[x0 | xt, c].
//
// Integrates the literal joint density with a tensor-product Simpson rule
// over every pixel entry at once, so it only scales to tiny canvases
// (H*W*C <= 3). It deliberately shares no algebra with AnalyticDenoiser:
// the integrand is prior-times-likelihood evaluated pointwise, and the
// posterior mean is the ratio of two numerical integrals.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dualcycle/condition.hpp"
#include "dualcycle/image.hpp"
#include "dualcycle/schedule.hpp"
#include "dualcycle/world.hpp"

namespace dualcycle_test {

// Componentwise E[x0 | xt, c] at diffusion step t.
inline dualcycle::ImageTensor quad_posterior_x0(const dualcycle::MixtureWorld& world,
                                                const dualcycle::NoiseSchedule& sched,
                                                const dualcycle::ImageTensor& xt, int t,
                                                const dualcycle::Condition& c,
                                                int min_nodes = 201) {
  const int d = static_cast<int>(xt.size());
  if (d > 3) throw std::invalid_argument("quad_posterior_x0: canvas too large for quadrature");
  if (t < 1 || t > sched.steps) throw std::invalid_argument("quad_posterior_x0: t out of range");

  const std::vector<double> w = world.weights_for(c);
  const auto& comps = world.components();
  const double s = world.pixel_noise();
  const double ab = sched.alpha_bar[static_cast<size_t>(t)];
  const double sa = std::sqrt(ab);
  const double like_var = 1.0 - ab;
  const double like_std = std::sqrt(like_var) / sa;  // width of the likelihood in x0 units

  // Integration window per entry: intersection of prior support and
  // likelihood support, with 10-sigma margins on both.
  std::vector<double> lo(d), hi(d), h(d);
  std::vector<int> nodes(d);
  for (int i = 0; i < d; ++i) {
    double mu_lo = comps[0].mean.data[static_cast<size_t>(i)];
    double mu_hi = mu_lo;
    for (const auto& comp : comps) {
      mu_lo = std::min(mu_lo, comp.mean.data[static_cast<size_t>(i)]);
      mu_hi = std::max(mu_hi, comp.mean.data[static_cast<size_t>(i)]);
    }
    const double prior_lo = mu_lo - 10.0 * s;
    const double prior_hi = mu_hi + 10.0 * s;
    const double like_center = xt.data[static_cast<size_t>(i)] / sa;
    const double like_lo = like_center - 10.0 * like_std;
    const double like_hi = like_center + 10.0 * like_std;
    lo[i] = std::max(prior_lo, like_lo);
    hi[i] = std::min(prior_hi, like_hi);
    if (!(lo[i] < hi[i])) {  // disjoint supports: fall back to the union
      lo[i] = std::min(prior_lo, like_lo);
      hi[i] = std::max(prior_hi, like_hi);
    }
    const double h_target = std::min(s, like_std) / 6.0;
    int n = static_cast<int>(std::ceil((hi[i] - lo[i]) / h_target)) + 1;
    n = std::max(n, min_nodes);
    if (n % 2 == 0) ++n;  // Simpson needs an odd node count
    nodes[i] = n;
    h[i] = (hi[i] - lo[i]) / (n - 1);
  }

  auto simpson_weight = [](int j, int n) -> double {
    if (j == 0 || j == n - 1) return 1.0;
    return (j % 2 == 1) ? 4.0 : 2.0;
  };

  // Odometer over the full grid. Normalization constants cancel in the
  // ratio, so only the exponentials are evaluated.
  std::vector<int> idx(d, 0);
  std::vector<double> x0(d, 0.0);
  double zsum = 0.0;
  std::vector<double> msum(d, 0.0);
  const size_t kcount = comps.size();
  while (true) {
    double wq = 1.0;
    for (int i = 0; i < d; ++i) {
      x0[i] = lo[i] + idx[i] * h[i];
      wq *= simpson_weight(idx[i], nodes[i]) * h[i] / 3.0;
    }
    double prior = 0.0;
    for (size_t k = 0; k < kcount; ++k) {
      if (w[k] == 0.0) continue;
      double q = 0.0;
      for (int i = 0; i < d; ++i) {
        const double dmu = x0[i] - comps[k].mean.data[static_cast<size_t>(i)];
        q += dmu * dmu;
      }
      prior += w[k] * std::exp(-q / (2.0 * s * s));
    }
    double q = 0.0;
    for (int i = 0; i < d; ++i) {
      const double r = xt.data[static_cast<size_t>(i)] - sa * x0[i];
      q += r * r;
    }
    const double f = wq * prior * std::exp(-q / (2.0 * like_var));
    zsum += f;
    for (int i = 0; i < d; ++i) msum[i] += f * x0[i];

    int carry = d - 1;
    while (carry >= 0 && ++idx[carry] == nodes[carry]) idx[carry--] = 0;
    if (carry < 0) break;
  }

  if (!(zsum > 0.0)) throw std::runtime_error("quad_posterior_x0: zero integral mass");
  dualcycle::ImageTensor out(xt.height, xt.width, xt.channels);
  for (int i = 0; i < d; ++i) out.data[static_cast<size_t>(i)] = msum[i] / zsum;
  return out;
}

}  // namespace dualcycle_test
