#include "dualcycle/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace dualcycle {

NoiseSchedule make_schedule(int steps, double beta_min, double beta_max, double eta) {
  if (steps < 1) throw std::invalid_argument("make_schedule: steps must be >= 1");
  if (!(beta_min > 0.0) || !(beta_max < 1.0) || beta_min > beta_max) {
    throw std::invalid_argument("make_schedule: need 0 < beta_min <= beta_max < 1");
  }
  if (!(eta >= 0.0) || !(eta <= 1.0)) {
    throw std::invalid_argument("make_schedule: eta must lie in [0, 1]");
  }

  NoiseSchedule s;
  s.steps = steps;
  s.eta = eta;
  s.beta.resize(steps + 1);
  s.alpha_bar.resize(steps + 1);
  s.sigma.assign(steps + 1, 0.0);

  s.beta[0] = beta_min;  // virtual pre-step rate, see schedule.hpp
  s.alpha_bar[0] = 1.0 - s.beta[0];
  for (int t = 1; t <= steps; ++t) {
    s.beta[t] = steps == 1 ? beta_min
                           : beta_min + (beta_max - beta_min) * (t - 1) / static_cast<double>(steps - 1);
    s.alpha_bar[t] = s.alpha_bar[t - 1] * (1.0 - s.beta[t]);
  }
  for (int t = 1; t <= steps; ++t) {
    const double ratio = (1.0 - s.alpha_bar[t - 1]) / (1.0 - s.alpha_bar[t]);
    s.sigma[t] = eta * std::sqrt(ratio) * std::sqrt(1.0 - s.alpha_bar[t] / s.alpha_bar[t - 1]);
  }
  return s;
}

}  // namespace dualcycle
