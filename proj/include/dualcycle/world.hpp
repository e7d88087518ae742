#pragma once

#include <map>
#include <string>
#include <vector>

#include "dualcycle/condition.hpp"
#include "dualcycle/denoiser.hpp"
#include "dualcycle/image.hpp"
#include "dualcycle/scene.hpp"
#include "dualcycle/schedule.hpp"

namespace dualcycle {

struct MixtureComponent {
  double weight = 0.0;  // prior mass; the world normalizes these to sum to 1
  ImageTensor mean;
  // Attribute assignment this component realizes. Conditions match against
  // these labels; hand-built components may leave them empty, in which case
  // only the unconditional weighting reaches them.
  std::map<std::string, std::string> labels;
};

// Directed attribute association: when the trigger value is present, the
// coupled attribute's conditional distribution puts `strength` on the coupled
// value and spreads the rest uniformly over its other values.
struct Coupling {
  std::string trigger_attribute;
  std::string trigger_value;
  std::string coupled_attribute;
  std::string coupled_value;
  double strength = 0.0;  // in [0, 1]
};

// Isotropic Gaussian mixture over images: component k has mean image mu_k
// and covariance s^2 I. Conditioning keeps the components whose labels agree
// with the condition and renormalizes their weights.
class MixtureWorld {
 public:
  MixtureWorld(std::vector<MixtureComponent> components, double pixel_noise);

  const std::vector<MixtureComponent>& components() const { return components_; }
  double pixel_noise() const { return pixel_noise_; }  // s
  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  const std::vector<Coupling>& couplings() const { return couplings_; }

  // Renormalized component weights under a condition. Unknown attribute
  // names raise VocabularyError (when the world has a vocabulary); a
  // condition no component satisfies raises UnsatisfiableConditionError.
  std::vector<double> weights_for(const Condition& c) const;

 private:
  friend MixtureWorld build_world(const Vocabulary&, const std::vector<Coupling>&, double, int, int, int);

  std::vector<MixtureComponent> components_;
  double pixel_noise_ = 0.0;
  int height_ = 0, width_ = 0, channels_ = 0;
  Vocabulary vocabulary_;  // empty for hand-built worlds
  std::vector<Coupling> couplings_;
};

// Enumerates every attribute combination in the vocabulary, renders each as
// a component mean, and assigns weights as the product of per-attribute
// factors: uniform by default, reshaped by the couplings whose trigger the
// combination satisfies. Validates couplings (known attributes and values,
// strength in [0, 1], trigger and coupled attributes distinct, coupled
// attribute with at least 2 values) and that every single attribute=value
// condition keeps positive mass.
MixtureWorld build_world(const Vocabulary& vocabulary, const std::vector<Coupling>& couplings,
                         double pixel_noise, int height, int width, int channels);

// log p(x0 | c) under the mixture, computed with log-sum-exp over the
// components with positive conditional weight.
double log_likelihood(const ImageTensor& x0, const Condition& c, const MixtureWorld& world);

// Exact reverse-process model for a mixture world. With forward marginal
// x_t = sqrt(ab_t) x0 + sqrt(1 - ab_t) n the posterior over components is
//
//   r_k(x_t) ∝ w_k(c) * N(x_t; sqrt(ab_t) mu_k, (ab_t s^2 + 1 - ab_t) I)
//
// and each component's conditional clean-image mean is
//
//   m_k(x_t) = mu_k + g_t (x_t - sqrt(ab_t) mu_k),  g_t = sqrt(ab_t) s^2 / (ab_t s^2 + 1 - ab_t)
//
// so E[x0 | x_t, c] = sum_k r_k m_k(x_t), which this class converts to the
// reverse mean for step t.
class AnalyticDenoiser : public Denoiser {
 public:
  AnalyticDenoiser(const MixtureWorld& world, const NoiseSchedule& sched);

  std::vector<double> responsibilities(const ImageTensor& xt, int t, const Condition& c) const;
  ImageTensor posterior_x0(const ImageTensor& xt, int t, const Condition& c) const;
  ImageTensor reverse_mean(const ImageTensor& xt, int t, const Condition& c) const override;

  const MixtureWorld& world() const { return *world_; }
  const NoiseSchedule& schedule() const { return *sched_; }

 private:
  const MixtureWorld* world_;
  const NoiseSchedule* sched_;
  std::vector<double> mean_sq_norms_;
};

}  // namespace dualcycle
