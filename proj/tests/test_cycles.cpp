#include "dualcycle/cycles.hpp"

#include <cmath>

#include "doctest.h"
#include "dualcycle/scene.hpp"
#include "dualcycle/world.hpp"

using namespace dualcycle;

namespace {

struct Fixture {
  NoiseSchedule sched = make_schedule(100, 1e-4, 0.02, 0.1);
  MixtureWorld world =
      build_world(Vocabulary::builtin(), {{"accessory", "scarf", "ear-style", "round", 0.95}}, 0.25,
                  16, 16, 3);
  AnalyticDenoiser den{world, sched};
  ImageTensor x0;
  Condition c_full{{"body-color", "orange"}, {"accessory", "none"}, {"ear-style", "pointy"}};

  Fixture() {
    SceneSpec spec;
    spec.assignment = {{"body-color", "orange"}, {"accessory", "none"}, {"ear-style", "pointy"}};
    x0 = render_scene(spec);
  }
};

}  // namespace

TEST_CASE("identity cycles reproduce the source at matched scales") {
  const Fixture f;
  for (int noise_step : {85, 60}) {
    RandomStream rng(900 + noise_step);
    const ScCycleResult sc =
        sc_cycle(f.x0, f.c_full, f.c_full, f.den, f.sched, 1.0, 1.0, noise_step, rng);
    CHECK(max_abs_diff(sc.x0_target, f.x0) <= 1e-3);
    CHECK(sc.z_source.start_step() == noise_step);
    CHECK(sc.source_trajectory.start_step() == noise_step);
    CHECK(bitwise_equal(sc.source_trajectory.x[0], f.x0));

    RandomStream rng2(1900 + noise_step);
    const CycleOutput be =
        be_cycle(f.x0, f.c_full, f.c_full, f.den, f.sched, 1.0, 1.0, noise_step, rng2);
    CHECK(max_abs_diff(be.x0_target, f.x0) <= 1e-3);
    CHECK(max_abs_diff(be.x0_inv, f.x0) <= 2e-3);  // two chained round trips
    CHECK(be.z_target.start_step() == noise_step);
  }
}

TEST_CASE("cycles are deterministic given the seed") {
  const Fixture f;
  const Condition c_tgt{{"body-color", "orange"}, {"accessory", "scarf"}};
  RandomStream a(123);
  RandomStream b(123);
  const CycleOutput r1 = be_cycle(f.x0, f.c_full, c_tgt, f.den, f.sched, 1.0, 2.0, 70, a);
  const CycleOutput r2 = be_cycle(f.x0, f.c_full, c_tgt, f.den, f.sched, 1.0, 2.0, 70, b);
  CHECK(bitwise_equal(r1.x0_target, r2.x0_target));
  CHECK(bitwise_equal(r1.x0_inv, r2.x0_inv));
}

TEST_CASE("condition swap rewrites the accessory band but keeps the body") {
  const Fixture f;
  const Condition c_src{{"body-color", "orange"}, {"accessory", "none"}};
  const Condition c_tgt{{"body-color", "orange"}, {"accessory", "scarf"}};
  RandomStream rng(5150);
  const ScCycleResult sc = sc_cycle(f.x0, c_src, c_tgt, f.den, f.sched, 1.0, 2.0, 60, rng);

  // Body pixels stay near the source; the band region moves toward the
  // scarf color, whose green channel sits far from the background's.
  const std::vector<uint8_t> body = region_pixels("body", 16, 16);
  const std::vector<uint8_t> band = region_pixels("accessory-band", 16, 16);
  double body_max = 0.0;
  double band_shift = 0.0;
  int band_count = 0;
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      if (body[y * 16 + x]) {
        for (int ch = 0; ch < 3; ++ch) {
          body_max = std::max(body_max, std::abs(sc.x0_target.at(y, x, ch) - f.x0.at(y, x, ch)));
        }
      }
      if (band[y * 16 + x]) {
        band_shift += std::abs(sc.x0_target.at(y, x, 1) - f.x0.at(y, x, 1));
        ++band_count;
      }
    }
  }
  CHECK(body_max < 0.35);
  // Band rows plus the draped ends: 24 + 8 pixels.
  CHECK(band_count == 32);
  CHECK(band_shift / band_count > 0.5);
}

TEST_CASE("a coupled prior drags the unbound ear style; an uncoupled one cannot") {
  // The measurement-protocol world: pixel noise 0.05, scarf coupled to round
  // ears at 0.95. The edit binds body color and accessory only, so the ear
  // style rides along on the prior: with the coupling, most scarf-adding
  // cycles come back round-eared; without it, the ear pixels replay the
  // source bit for bit because both conditions weight the styles equally at
  // every step.
  const NoiseSchedule sched = make_schedule(100, 1e-4, 0.02, 0.1);
  SceneSpec spec;
  spec.assignment = {{"body-color", "orange"}, {"accessory", "none"}, {"ear-style", "pointy"}};
  const ImageTensor src = render_scene(spec);
  spec.assignment["ear-style"] = "round";
  const ImageTensor round_src = render_scene(spec);
  const Condition c_src{{"body-color", "orange"}, {"accessory", "none"}};
  const Condition c_tgt{{"body-color", "orange"}, {"accessory", "scarf"}};
  const std::vector<uint8_t> ears = region_pixels("ears", 16, 16);

  auto ear_l1 = [&](const ImageTensor& img, const ImageTensor& ref) {
    double acc = 0.0;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        if (!ears[static_cast<size_t>(y) * 16 + x]) continue;
        for (int ch = 0; ch < 3; ++ch) acc += std::abs(img.at(y, x, ch) - ref.at(y, x, ch));
      }
    return acc;
  };

  const MixtureWorld coupled = build_world(
      Vocabulary::builtin(), {{"accessory", "scarf", "ear-style", "round", 0.95}}, 0.05, 16, 16, 3);
  const AnalyticDenoiser den_coupled(coupled, sched);
  int drifted = 0;
  for (int seed = 0; seed < 12; ++seed) {
    RandomStream rng(4200 + seed);
    const ScCycleResult sc = sc_cycle(src, c_src, c_tgt, den_coupled, sched, 1.0, 1.0, 85, rng);
    if (ear_l1(sc.x0_target, round_src) < ear_l1(sc.x0_target, src)) ++drifted;
  }
  CHECK(drifted > 6);

  const MixtureWorld uncoupled = build_world(Vocabulary::builtin(), {}, 0.05, 16, 16, 3);
  const AnalyticDenoiser den_uncoupled(uncoupled, sched);
  for (int seed = 0; seed < 4; ++seed) {
    RandomStream rng(4200 + seed);
    const ScCycleResult sc = sc_cycle(src, c_src, c_tgt, den_uncoupled, sched, 1.0, 1.0, 85, rng);
    double ear_dev = 0.0;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        if (!ears[static_cast<size_t>(y) * 16 + x]) continue;
        for (int ch = 0; ch < 3; ++ch)
          ear_dev = std::max(ear_dev, std::abs(sc.x0_target.at(y, x, ch) - src.at(y, x, ch)));
      }
    CHECK(ear_dev <= 1e-9);
  }
}
