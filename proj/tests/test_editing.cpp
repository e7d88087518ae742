#include "dualcycle/editing.hpp"

#include <cmath>
#include <stdexcept>

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
  Condition c_src{{"body-color", "orange"}, {"accessory", "none"}};
  Condition c_tgt{{"body-color", "orange"}, {"accessory", "scarf"}};

  Fixture() {
    SceneSpec spec;
    spec.assignment = {{"body-color", "orange"}, {"accessory", "none"}, {"ear-style", "pointy"}};
    x0 = render_scene(spec);
  }

  static EditMask full_mask(uint8_t v) {
    EditMask m{16, 16, std::vector<uint8_t>(256, v)};
    return m;
  }
};

}  // namespace

TEST_CASE("all-ones mask reproduces the plain conditioned decode bitwise") {
  const Fixture f;
  RandomStream rng(1);
  const EncodeResult enc = dpm_encode(f.x0, f.c_src, f.den, f.sched, 1.0, rng, 85);

  EditPlan plan;
  plan.c_target = f.c_tgt;
  plan.mask = Fixture::full_mask(1);
  plan.noise_step = 85;
  plan.blend_step = 60;
  plan.guidance_scale = 2.0;
  const ImageTensor edited = masked_edit(enc.z, enc.trajectory, plan, f.den, f.sched);

  const ImageTensor plain = decode(enc.z, f.c_tgt, f.den, f.sched, 2.0);
  CHECK(bitwise_equal(edited, plain));
}

TEST_CASE("all-zero mask in replay mode returns the source bitwise") {
  const Fixture f;
  RandomStream rng(2);
  const EncodeResult enc = dpm_encode(f.x0, f.c_src, f.den, f.sched, 1.0, rng, 85);

  EditPlan plan;
  plan.c_target = f.c_tgt;
  plan.mask = Fixture::full_mask(0);
  plan.noise_step = 85;
  plan.guidance_scale = 3.0;
  for (int k : {85, 60, 1}) {
    plan.blend_step = k;
    const ImageTensor edited = masked_edit(enc.z, enc.trajectory, plan, f.den, f.sched);
    CHECK(bitwise_equal(edited, f.x0));
  }
}

TEST_CASE("all-zero mask in resample mode returns the source to rounding") {
  const Fixture f;
  RandomStream rng(3);
  const EncodeResult enc = dpm_encode(f.x0, f.c_src, f.den, f.sched, 1.0, rng, 85);

  EditPlan plan;
  plan.c_target = f.c_tgt;
  plan.mask = Fixture::full_mask(0);
  plan.noise_step = 85;
  plan.blend_step = 60;
  plan.blend = BlendMode::resample;
  RandomStream blend_rng(4);
  const ImageTensor edited = masked_edit(enc.z, enc.trajectory, plan, f.den, f.sched, &blend_rng);
  // The resampled path ends at the same clean image, so the preserved
  // region is pinned to it exactly.
  CHECK(bitwise_equal(edited, f.x0));

  // Resample mode cannot run without a noise source.
  CHECK_THROWS_AS(masked_edit(enc.z, enc.trajectory, plan, f.den, f.sched, nullptr),
                  std::invalid_argument);
}

TEST_CASE("preserved pixels are pinned and edited pixels move") {
  const Fixture f;
  RandomStream rng(5);
  const EncodeResult enc = dpm_encode(f.x0, f.c_src, f.den, f.sched, 1.0, rng, 85);

  // Editable region = accessory band only.
  const std::vector<uint8_t> band = region_pixels("accessory-band", 16, 16);
  EditPlan plan;
  plan.c_target = f.c_tgt;
  plan.mask = EditMask{16, 16, band};
  plan.noise_step = 85;
  plan.blend_step = 70;
  plan.guidance_scale = 2.0;
  const ImageTensor edited = masked_edit(enc.z, enc.trajectory, plan, f.den, f.sched);

  double inside_shift = 0.0;
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      if (band[y * 16 + x]) {
        inside_shift += std::abs(edited.at(y, x, 1) - f.x0.at(y, x, 1));
      } else {
        for (int c = 0; c < 3; ++c) CHECK(edited.at(y, x, c) == f.x0.at(y, x, c));
      }
    }
  }
  CHECK(inside_shift / 24.0 > 0.5);  // band pixels moved toward the scarf color
}

TEST_CASE("plan validation") {
  const Fixture f;
  RandomStream rng(6);
  const EncodeResult enc = dpm_encode(f.x0, f.c_src, f.den, f.sched, 1.0, rng, 85);

  EditPlan plan;
  plan.c_target = f.c_tgt;
  plan.mask = Fixture::full_mask(1);
  plan.noise_step = 85;

  plan.blend_step = 0;
  CHECK_THROWS_AS(masked_edit(enc.z, enc.trajectory, plan, f.den, f.sched), std::invalid_argument);
  plan.blend_step = 86;
  CHECK_THROWS_AS(masked_edit(enc.z, enc.trajectory, plan, f.den, f.sched), std::invalid_argument);

  // Latent depth must match the plan's noise_step.
  plan.blend_step = 50;
  plan.noise_step = 84;
  CHECK_THROWS_AS(masked_edit(enc.z, enc.trajectory, plan, f.den, f.sched), std::invalid_argument);

  // Mask geometry must match the image.
  plan.noise_step = 85;
  plan.mask = EditMask{8, 8, std::vector<uint8_t>(64, 1)};
  CHECK_THROWS_AS(masked_edit(enc.z, enc.trajectory, plan, f.den, f.sched), std::invalid_argument);
}

TEST_CASE("convenience overload matches encode-then-edit with a shared stream") {
  const Fixture f;

  EditPlan plan;
  plan.c_target = f.c_tgt;
  plan.mask = EditMask{16, 16, region_pixels("accessory-band", 16, 16)};
  plan.noise_step = 85;
  plan.blend_step = 60;
  plan.guidance_scale = 2.0;

  RandomStream explicit_rng(777);
  const EncodeResult enc = dpm_encode(f.x0, f.c_src, f.den, f.sched, 1.0, explicit_rng, 85);
  const ImageTensor manual = masked_edit(enc.z, enc.trajectory, plan, f.den, f.sched, &explicit_rng);

  RandomStream shared_rng(777);
  const ImageTensor convenient =
      masked_edit(f.x0, f.c_src, 1.0, plan, f.den, f.sched, shared_rng);
  CHECK(bitwise_equal(manual, convenient));
}
