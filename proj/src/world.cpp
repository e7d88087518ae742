#include "dualcycle/world.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dualcycle/diffusion.hpp"
#include "dualcycle/errors.hpp"

namespace dualcycle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : v) {
    if (x != kNegInf) acc += std::exp(x - m);
  }
  return m + std::log(acc);
}

bool matches(const MixtureComponent& comp, const Condition& c) {
  for (const auto& [name, value] : c.attributes()) {
    auto it = comp.labels.find(name);
    if (it == comp.labels.end() || it->second != value) return false;
  }
  return true;
}

}  // namespace

MixtureWorld::MixtureWorld(std::vector<MixtureComponent> components, double pixel_noise)
    : components_(std::move(components)), pixel_noise_(pixel_noise) {
  if (components_.empty()) throw WorldConstructionError("world needs at least one component");
  if (!(pixel_noise > 0.0)) throw WorldConstructionError("pixel_noise must be positive");
  double total = 0.0;
  for (const MixtureComponent& comp : components_) {
    if (!(comp.weight >= 0.0)) throw WorldConstructionError("component weights must be non-negative");
    if (!comp.mean.same_shape(components_.front().mean)) {
      throw WorldConstructionError("all component means must share one canvas shape");
    }
    total += comp.weight;
  }
  if (!(total > 0.0)) throw WorldConstructionError("total component weight must be positive");
  for (MixtureComponent& comp : components_) comp.weight /= total;
  height_ = components_.front().mean.height;
  width_ = components_.front().mean.width;
  channels_ = components_.front().mean.channels;
}

std::vector<double> MixtureWorld::weights_for(const Condition& c) const {
  if (!vocabulary_.attributes().empty()) {
    for (const auto& [name, value] : c.attributes()) {
      vocabulary_.validate(name, value);
    }
  }
  std::vector<double> w(components_.size(), 0.0);
  double total = 0.0;
  for (size_t k = 0; k < components_.size(); ++k) {
    if (matches(components_[k], c)) {
      w[k] = components_[k].weight;
      total += w[k];
    }
  }
  if (!(total > 0.0)) {
    throw UnsatisfiableConditionError("no component has positive weight under condition " + c.to_string());
  }
  for (double& x : w) x /= total;
  return w;
}

MixtureWorld build_world(const Vocabulary& vocabulary, const std::vector<Coupling>& couplings,
                         double pixel_noise, int height, int width, int channels) {
  const auto& attrs = vocabulary.attributes();
  if (attrs.empty()) throw WorldConstructionError("vocabulary must name at least one attribute");

  for (const Coupling& cp : couplings) {
    vocabulary.validate(cp.trigger_attribute, cp.trigger_value);
    vocabulary.validate(cp.coupled_attribute, cp.coupled_value);
    if (cp.trigger_attribute == cp.coupled_attribute) {
      throw WorldConstructionError("coupling may not trigger on its own coupled attribute: " +
                                   cp.coupled_attribute);
    }
    if (!(cp.strength >= 0.0) || !(cp.strength <= 1.0)) {
      throw WorldConstructionError("coupling strength must lie in [0, 1]");
    }
    if (vocabulary.find(cp.coupled_attribute)->values.size() < 2) {
      throw WorldConstructionError("coupled attribute " + cp.coupled_attribute +
                                   " needs at least 2 values");
    }
  }

  // Enumerate the cartesian product of attribute values in vocabulary order.
  std::vector<MixtureComponent> components;
  std::vector<size_t> idx(attrs.size(), 0);
  while (true) {
    SceneSpec spec;
    spec.height = height;
    spec.width = width;
    spec.channels = channels;
    for (size_t j = 0; j < attrs.size(); ++j) {
      spec.assignment[attrs[j].name] = attrs[j].values[idx[j]];
    }

    double weight = 1.0;
    for (size_t j = 0; j < attrs.size(); ++j) {
      const std::string& value = attrs[j].values[idx[j]];
      double factor = 1.0 / static_cast<double>(attrs[j].values.size());
      bool coupled = false;
      for (const Coupling& cp : couplings) {
        if (cp.coupled_attribute != attrs[j].name) continue;
        if (spec.assignment.at(cp.trigger_attribute) != cp.trigger_value) continue;
        const double alt = (1.0 - cp.strength) / static_cast<double>(attrs[j].values.size() - 1);
        const double f = value == cp.coupled_value ? cp.strength : alt;
        factor = coupled ? factor * f : f;
        coupled = true;
      }
      weight *= factor;
    }

    MixtureComponent comp;
    comp.weight = weight;
    comp.mean = render_scene(spec);
    comp.labels = spec.assignment;
    components.push_back(std::move(comp));

    size_t j = 0;
    for (; j < attrs.size(); ++j) {
      if (++idx[j] < attrs[j].values.size()) break;
      idx[j] = 0;
    }
    if (j == attrs.size()) break;
  }

  MixtureWorld world(std::move(components), pixel_noise);
  world.vocabulary_ = vocabulary;
  world.couplings_ = couplings;

  // Every single attribute constraint must stay reachable; a coupling with
  // strength 1 is allowed to zero out combinations but not whole values.
  for (const AttributeDef& def : attrs) {
    for (const std::string& value : def.values) {
      double mass = 0.0;
      for (const MixtureComponent& comp : world.components_) {
        if (comp.labels.at(def.name) == value) mass += comp.weight;
      }
      if (!(mass > 0.0)) {
        throw WorldConstructionError("no reachable component with " + def.name + "=" + value);
      }
    }
  }
  return world;
}

double log_likelihood(const ImageTensor& x0, const Condition& c, const MixtureWorld& world) {
  if (x0.height != world.height() || x0.width != world.width() || x0.channels != world.channels()) {
    throw std::invalid_argument("log_likelihood: image shape does not match the world canvas");
  }
  const std::vector<double> w = world.weights_for(c);
  const double s2 = world.pixel_noise() * world.pixel_noise();
  const double d = static_cast<double>(x0.size());
  const double log_norm = -0.5 * d * std::log(2.0 * M_PI * s2);
  std::vector<double> terms(w.size(), kNegInf);
  for (size_t k = 0; k < w.size(); ++k) {
    if (w[k] <= 0.0) continue;
    const ImageTensor& mu = world.components()[k].mean;
    double sq = 0.0;
    for (size_t i = 0; i < x0.data.size(); ++i) {
      const double diff = x0.data[i] - mu.data[i];
      sq += diff * diff;
    }
    terms[k] = std::log(w[k]) + log_norm - 0.5 * sq / s2;
  }
  return log_sum_exp(terms);
}

AnalyticDenoiser::AnalyticDenoiser(const MixtureWorld& world, const NoiseSchedule& sched)
    : world_(&world), sched_(&sched) {
  mean_sq_norms_.reserve(world.components().size());
  for (const MixtureComponent& comp : world.components()) {
    double sq = 0.0;
    for (double v : comp.mean.data) sq += v * v;
    mean_sq_norms_.push_back(sq);
  }
}

std::vector<double> AnalyticDenoiser::responsibilities(const ImageTensor& xt, int t,
                                                       const Condition& c) const {
  if (t < 1 || t > sched_->steps) {
    throw std::invalid_argument("responsibilities: step outside [1, T]");
  }
  if (xt.height != world_->height() || xt.width != world_->width() || xt.channels != world_->channels()) {
    throw std::invalid_argument("responsibilities: image shape does not match the world canvas");
  }
  const std::vector<double> w = world_->weights_for(c);
  const double ab = sched_->alpha_bar[t];
  const double sr_ab = std::sqrt(ab);
  const double s2 = world_->pixel_noise() * world_->pixel_noise();
  const double v = ab * s2 + (1.0 - ab);

  double xt_sq = 0.0;
  for (double x : xt.data) xt_sq += x * x;

  std::vector<double> logits(w.size(), kNegInf);
  for (size_t k = 0; k < w.size(); ++k) {
    if (w[k] <= 0.0) continue;
    const ImageTensor& mu = world_->components()[k].mean;
    double dot = 0.0;
    for (size_t i = 0; i < xt.data.size(); ++i) dot += xt.data[i] * mu.data[i];
    const double sq = xt_sq - 2.0 * sr_ab * dot + ab * mean_sq_norms_[k];
    logits[k] = std::log(w[k]) - 0.5 * sq / v;
  }
  const double lse = log_sum_exp(logits);
  std::vector<double> r(w.size(), 0.0);
  for (size_t k = 0; k < w.size(); ++k) {
    if (logits[k] != kNegInf) r[k] = std::exp(logits[k] - lse);
  }
  return r;
}

ImageTensor AnalyticDenoiser::posterior_x0(const ImageTensor& xt, int t, const Condition& c) const {
  const std::vector<double> r = responsibilities(xt, t, c);
  const double ab = sched_->alpha_bar[t];
  const double sr_ab = std::sqrt(ab);
  const double s2 = world_->pixel_noise() * world_->pixel_noise();
  const double gain = sr_ab * s2 / (ab * s2 + (1.0 - ab));

  ImageTensor out(xt.height, xt.width, xt.channels);
  const double mu_weight = 1.0 - gain * sr_ab;
  for (size_t k = 0; k < r.size(); ++k) {
    if (r[k] <= 0.0) continue;
    const ImageTensor& mu = world_->components()[k].mean;
    const double w = r[k] * mu_weight;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += w * mu.data[i];
  }
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += gain * xt.data[i];
  return out;
}

ImageTensor AnalyticDenoiser::reverse_mean(const ImageTensor& xt, int t, const Condition& c) const {
  return mean_from_clean_estimate(xt, posterior_x0(xt, t, c), t, *sched_);
}

}  // namespace dualcycle
