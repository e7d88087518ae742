#pragma once

#include <cstdint>
#include <random>

#include "dualcycle/image.hpp"

namespace dualcycle {

// Deterministic Gaussian/uniform source. std::normal_distribution is
// implementation-defined, so normals come from an explicit Box-Muller
// transform over the fully specified mt19937_64 output stream; the same
// seed yields the same draw sequence on every build of this project.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform();

  double normal();

  ImageTensor normal_image(int h, int w, int c);

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// splitmix64 finalizer; the standard 64-bit avalanche mix.
uint64_t mix64(uint64_t x);

// Seed for one unit of work, derived by folding each path component into the
// master seed through mix64. Pure function: (master, path) -> seed, so any
// trial can be replayed in isolation.
uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> path);

}  // namespace dualcycle
