// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. Criterion 10 exercises the installed CLI when its path is
// given as argv[1] (the test registration passes the built binary); without
// it the reproducibility check runs through the library entry point.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "dualcycle/cycles.hpp"
#include "dualcycle/editing.hpp"
#include "dualcycle/experiment.hpp"
#include "dualcycle/image_io.hpp"
#include "dualcycle/metrics.hpp"
#include "dualcycle/scene.hpp"
#include "dualcycle/world.hpp"
#include "quadrature.hpp"

using namespace dualcycle;
namespace fs = std::filesystem;

namespace {

std::string strf(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return std::string(buf);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CheckResult {
  bool pass = false;
  std::string detail;
};

MixtureWorld tiny_world(std::vector<double> weights, std::vector<std::vector<double>> means,
                        int h, int w, int c, double s) {
  std::vector<MixtureComponent> comps;
  for (size_t k = 0; k < weights.size(); ++k) {
    MixtureComponent comp;
    comp.weight = weights[k];
    comp.mean = ImageTensor(h, w, c);
    comp.mean.data = means[k];
    comps.push_back(comp);
  }
  return MixtureWorld(std::move(comps), s);
}

SceneSpec scene_of(const std::string& body, const std::string& accessory, const std::string& ears) {
  SceneSpec spec;
  spec.assignment = {{"body-color", body}, {"accessory", accessory}, {"ear-style", ears}};
  return spec;
}

// ---------------------------------------------------------------------------
// 1. Encode/decode round trip on random scene/condition pairs, with timing.

CheckResult criterion_inversion() {
  const NoiseSchedule sched = make_schedule(100, 1e-4, 0.02, 0.1);
  const MixtureWorld world = make_world(default_world_config());
  const AnalyticDenoiser den(world, sched);
  const auto& attrs = Vocabulary::builtin().attributes();

  RandomStream pick(20260818);
  double worst_err = 0.0, slowest = 0.0;
  for (int i = 0; i < 20; ++i) {
    SceneSpec spec;
    Condition c;
    for (const AttributeDef& def : attrs) {
      const int n = static_cast<int>(def.values.size());
      int idx = static_cast<int>(pick.uniform() * n);
      if (idx >= n) idx = n - 1;
      spec.assignment[def.name] = def.values[idx];
      // Bind roughly two of three attributes so both full and partial
      // conditions appear across the 20 pairs.
      if (pick.uniform() < 0.7) c.set(def.name, def.values[idx]);
    }
    const ImageTensor x0 = render_scene(spec);
    RandomStream rng(derive_seed(101, {static_cast<uint64_t>(i)}));

    const auto t0 = std::chrono::steady_clock::now();
    const EncodeResult enc = dpm_encode(x0, c, den, sched, 1.0, rng);
    const ImageTensor back = decode(enc.z, c, den, sched, 1.0);
    slowest = std::max(slowest, seconds_since(t0));
    worst_err = std::max(worst_err, max_abs_diff(back, x0));
  }
  CheckResult r;
  r.pass = worst_err <= 1e-3 && slowest <= 2.0;
  r.detail = strf("20 pairs at T=100 eta=0.1: max abs err %.2e (tol 1e-3), slowest %.3f s/pair (limit 2 s)",
                  worst_err, slowest);
  return r;
}

// ---------------------------------------------------------------------------
// 2. Analytic posterior mean vs brute-force quadrature on tiny canvases.

CheckResult criterion_quadrature() {
  const NoiseSchedule sched = make_schedule(100, 1e-4, 0.02, 0.1);
  const double s = 0.3;

  struct Setup {
    MixtureWorld world;
    std::vector<std::vector<double>> probes;  // clean-image level
  };
  std::vector<Setup> setups;
  setups.push_back({tiny_world({1.0}, {{0.5}}, 1, 1, 1, s), {{0.0}, {0.3}, {0.55}, {1.0}}});
  setups.push_back({tiny_world({0.6, 0.4}, {{0.2}, {0.8}}, 1, 1, 1, s), {{0.1}, {0.5}, {0.9}}});
  setups.push_back({tiny_world({0.5, 0.3, 0.2}, {{0.2}, {0.5}, {0.8}}, 1, 1, 1, s),
                    {{0.15}, {0.5}, {0.85}}});
  setups.push_back({tiny_world({1.0}, {{0.4, 0.6}}, 1, 2, 1, s), {{0.3, 0.5}, {0.6, 0.7}}});
  setups.push_back({tiny_world({0.6, 0.4}, {{0.3, 0.4}, {0.7, 0.8}}, 1, 2, 1, s),
                    {{0.4, 0.5}, {0.65, 0.75}}});
  setups.push_back({tiny_world({0.5, 0.3, 0.2}, {{0.2, 0.7}, {0.5, 0.3}, {0.8, 0.6}}, 1, 2, 1, s),
                    {{0.3, 0.5}, {0.6, 0.4}, {0.9, 0.7}}});

  double worst_rel = 0.0, oracle_gap = 0.0;
  for (const Setup& setup : setups) {
    const AnalyticDenoiser den(setup.world, sched);
    const int w = setup.world.width();
    for (int t : {1, 50, 100}) {
      const double sa = std::sqrt(sched.alpha_bar[t]);
      for (const auto& probe : setup.probes) {
        ImageTensor xt(1, w, 1);
        for (int i = 0; i < w; ++i) xt.data[i] = probe[i] * sa;
        const ImageTensor got = den.posterior_x0(xt, t, Condition{});
        const ImageTensor want = dualcycle_test::quad_posterior_x0(setup.world, sched, xt, t, Condition{});
        for (int i = 0; i < w; ++i) {
          const double rel =
              std::abs(got.data[i] - want.data[i]) / std::max(1e-6, std::abs(want.data[i]));
          worst_rel = std::max(worst_rel, rel);
        }
        // The K=1 cases double as a check of the oracle itself: the
        // single-Gaussian posterior mean has a closed form.
        if (setup.world.components().size() == 1) {
          const double ab = sched.alpha_bar[t];
          const double v = ab * s * s + (1.0 - ab);
          const double gain = std::sqrt(ab) * s * s / v;
          for (int i = 0; i < w; ++i) {
            const double mu = setup.world.components()[0].mean.data[i];
            const double closed = mu + gain * (xt.data[i] - std::sqrt(ab) * mu);
            oracle_gap = std::max(oracle_gap, std::abs(want.data[i] - closed));
          }
        }
      }
    }
  }
  CheckResult r;
  r.pass = worst_rel <= 1e-3 && oracle_gap <= 1e-6;
  r.detail = strf("K in {1,2,3} on 1- and 2-pixel canvases, t in {1,50,100}: max rel err %.2e "
                  "(tol 1e-3); quadrature vs closed form %.2e (tol 1e-6)",
                  worst_rel, oracle_gap);
  return r;
}

// ---------------------------------------------------------------------------
// 3. decode == decode_tail(decode_head) bitwise at every split point.

CheckResult criterion_composition() {
  const NoiseSchedule sched = make_schedule(100, 1e-4, 0.02, 0.1);
  const MixtureWorld world = make_world(default_world_config());
  const AnalyticDenoiser den(world, sched);
  const ImageTensor x0 = render_scene(scene_of("teal", "none", "round"));
  const Condition c{{"body-color", "teal"}};  // partial: guidance is active

  bool all_equal = true;
  for (double scale : {1.0, 1.5}) {
    RandomStream rng(derive_seed(303, {static_cast<uint64_t>(scale * 2)}));
    const EncodeResult enc = dpm_encode(x0, c, den, sched, scale, rng);
    const ImageTensor whole = decode(enc.z, c, den, sched, scale);
    for (int k : {1, 25, 50, 75, 99}) {
      const ImageTensor xk = decode_head(enc.z, c, k, den, sched, scale);
      const std::span<const ImageTensor> eps_1k(enc.z.eps.data(), static_cast<size_t>(k));
      const ImageTensor rejoined = decode_tail(xk, eps_1k, c, k, den, sched, scale);
      all_equal = all_equal && bitwise_equal(rejoined, whole);
    }
  }
  CheckResult r;
  r.pass = all_equal;
  r.detail = strf("split points {1,25,50,75,99} at scales 1.0 and 1.5: %s",
                  all_equal ? "all bitwise equal to the unsplit decode" : "MISMATCH");
  return r;
}

// ---------------------------------------------------------------------------
// 4. Identity cycles reproduce the source at every protocol noise step.

CheckResult criterion_identity_cycles() {
  const NoiseSchedule sched = make_schedule(100, 1e-4, 0.02, 0.1);
  const MixtureWorld world = make_world(default_world_config());
  const AnalyticDenoiser den(world, sched);
  const ImageTensor x0 = render_scene(scene_of("orange", "none", "pointy"));
  const Condition c{{"body-color", "orange"}, {"accessory", "none"}, {"ear-style", "pointy"}};

  double worst = 0.0;
  for (int noise_step : {85, 80, 75, 70, 60, 50}) {
    RandomStream rng(derive_seed(404, {static_cast<uint64_t>(noise_step), 0}));
    const ScCycleResult sc = sc_cycle(x0, c, c, den, sched, 1.0, 1.0, noise_step, rng);
    worst = std::max(worst, max_abs_diff(sc.x0_target, x0));

    RandomStream rng2(derive_seed(404, {static_cast<uint64_t>(noise_step), 1}));
    const CycleOutput be = be_cycle(x0, c, c, den, sched, 1.0, 1.0, noise_step, rng2);
    worst = std::max(worst, max_abs_diff(be.x0_target, x0));
    worst = std::max(worst, max_abs_diff(be.x0_inv, x0));
  }
  CheckResult r;
  r.pass = worst <= 1e-3;
  r.detail = strf("c_src = c_tgt over noise steps {85,80,75,70,60,50}: max abs deviation %.2e (tol 1e-3)",
                  worst);
  return r;
}

// ---------------------------------------------------------------------------
// 5. Mask pipeline correctness.

CheckResult criterion_masks() {
  const PatchStatsExtractor extractor(4, 4);
  std::vector<std::string> problems;

  // Identical pairs give the all-zero mask, for flat scenes and noise alike.
  const ImageTensor scene = render_scene(scene_of("gray", "scarf", "round"));
  RandomStream rng(505);
  const ImageTensor noise = rng.normal_image(16, 16, 3);
  for (const ImageTensor* img : {&scene, &noise}) {
    const EditMask m = grid_refine(*img, *img, extractor, 0.5, BinarizeMode::dissimilarity);
    for (uint8_t v : m.values) {
      if (v != 0) {
        problems.push_back("identical pair produced a nonzero cell");
        break;
      }
    }
  }

  // A change confined to one quadrant only marks cells of that quadrant.
  for (int quadrant = 0; quadrant < 4; ++quadrant) {
    const int y0 = (quadrant / 2) * 8, x0 = (quadrant % 2) * 8;
    ImageTensor changed = scene;
    for (int y = y0 + 2; y < y0 + 6; ++y)
      for (int x = x0 + 2; x < x0 + 6; ++x)
        for (int ch = 0; ch < 3; ++ch) changed.at(y, x, ch) += 1.5;
    const EditMask m = grid_refine(scene, changed, extractor, 0.5, BinarizeMode::dissimilarity);
    bool any = false, confined = true;
    for (int i = 0; i < m.rows; ++i) {
      for (int j = 0; j < m.cols; ++j) {
        if (!m.at(i, j)) continue;
        any = true;
        confined = confined && (i / 4 == quadrant / 2) && (j / 4 == quadrant % 2);
      }
    }
    if (!any) problems.push_back("quadrant change went undetected");
    if (!confined) problems.push_back("mask leaked outside the changed quadrant");
  }

  // The default threshold is honored strictly: normalized scores {0, .5, 1}
  // mark only the top cell at delta = 0.5.
  SimilarityGrid ladder{1, 3, {1.0, 0.5, 0.0}};
  const EditMask at_half = binarize(ladder, 0.5, BinarizeMode::dissimilarity);
  if (!(at_half.values == std::vector<uint8_t>{0, 0, 1}))
    problems.push_back("delta = 0.5 not honored strictly");
  const EditMask looser = binarize(ladder, 0.4, BinarizeMode::dissimilarity);
  if (!(looser.values == std::vector<uint8_t>{0, 1, 1}))
    problems.push_back("delta = 0.4 did not admit the middle cell");

  // Cosine similarity against a scalar-loop oracle.
  double worst_sim = 0.0;
  const ImageTensor other = render_scene(scene_of("orange", "none", "pointy"));
  RandomStream rng2(506);
  const ImageTensor noise2 = rng2.normal_image(16, 16, 3);
  const std::vector<std::pair<const ImageTensor*, const ImageTensor*>> pairs = {
      {&scene, &other}, {&noise, &noise2}, {&scene, &noise}};
  for (const auto& [a, b] : pairs) {
    const FeatureGrid ga = extractor.extract(*a);
    const FeatureGrid gb = extractor.extract(*b);
    const SimilarityGrid s = similarity(ga, gb);
    for (int i = 0; i < s.rows; ++i) {
      for (int j = 0; j < s.cols; ++j) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (int k = 0; k < ga.depth; ++k) {
          dot += ga.at(i, j, k) * gb.at(i, j, k);
          na += ga.at(i, j, k) * ga.at(i, j, k);
          nb += gb.at(i, j, k) * gb.at(i, j, k);
        }
        const double oracle = (na == 0.0 || nb == 0.0) ? 0.0 : dot / (std::sqrt(na) * std::sqrt(nb));
        worst_sim = std::max(worst_sim, std::abs(s.at(i, j) - oracle));
      }
    }
  }
  if (worst_sim > 1e-6) problems.push_back(strf("similarity oracle gap %.2e", worst_sim));

  CheckResult r;
  r.pass = problems.empty();
  if (r.pass) {
    r.detail = strf("identical pairs zero, 4/4 quadrants confined, delta honored, "
                    "similarity oracle gap %.2e (tol 1e-6)",
                    worst_sim);
  } else {
    r.detail = problems.front();
  }
  return r;
}

// ---------------------------------------------------------------------------
// 6. Masked-edit blend identities at every protocol blend step.

CheckResult criterion_blend_identities() {
  const NoiseSchedule sched = make_schedule(100, 1e-4, 0.02, 0.1);
  const MixtureWorld world = make_world(default_world_config());
  const AnalyticDenoiser den(world, sched);
  const ImageTensor x0 = render_scene(scene_of("orange", "none", "pointy"));
  const Condition c_src{{"body-color", "orange"}, {"accessory", "none"}};
  const Condition c_tgt{{"body-color", "orange"}, {"accessory", "scarf"}};
  const int noise_step = 85;

  RandomStream rng(606);
  const EncodeResult enc = dpm_encode(x0, c_src, den, sched, 1.0, rng, noise_step);
  const ImageTensor plain = decode(enc.z, c_tgt, den, sched, 2.0);

  bool ones_bitwise = true;
  double zero_err = 0.0;
  for (int k : {85, 80, 75, 70, 60, 50}) {
    EditPlan plan;
    plan.c_target = c_tgt;
    plan.noise_step = noise_step;
    plan.blend_step = k;
    plan.guidance_scale = 2.0;

    plan.mask = EditMask{16, 16, std::vector<uint8_t>(256, 1)};
    const ImageTensor full = masked_edit(enc.z, enc.trajectory, plan, den, sched);
    ones_bitwise = ones_bitwise && bitwise_equal(full, plain);

    plan.mask = EditMask{16, 16, std::vector<uint8_t>(256, 0)};
    const ImageTensor none = masked_edit(enc.z, enc.trajectory, plan, den, sched);
    zero_err = std::max(zero_err, max_abs_diff(none, x0));
  }
  CheckResult r;
  r.pass = ones_bitwise && zero_err <= 1e-3;
  r.detail = strf("blend steps {85,80,75,70,60,50} at noise step 85: all-ones mask %s; "
                  "all-zero replay max err %.1e (tol 1e-3)",
                  ones_bitwise ? "bitwise equals the plain edit" : "DIVERGED", zero_err);
  return r;
}

// ---------------------------------------------------------------------------
// 7. Bias reproduction under the scarf -> round-ears coupling.

CheckResult criterion_bias(const ExperimentSummary** out_summary) {
  static ExperimentSummary summary;
  ExperimentConfig cfg;  // protocol defaults: full sweep, 3 tuples
  cfg.output_dir = "";
  cfg.seed = 20260818;
  cfg.trials = 15;

  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult res = run_experiment(cfg);
  const double elapsed = seconds_since(t0);
  summary = res.summary;
  if (out_summary != nullptr) *out_summary = &summary;

  const bool iou_gap = summary.biased_offtarget_iou > summary.unbiased_offtarget_iou;
  const bool psnr_gap = summary.masked_psnr_outside > summary.plain_psnr_outside;
  const bool align_ok = summary.masked_d_align >= summary.plain_d_align - 0.01;
  const bool in_time = elapsed <= 600.0;

  CheckResult r;
  r.pass = res.all_ok && iou_gap && psnr_gap && align_ok && in_time;
  r.detail = strf(
      "15 trials, full sweep, %.0f s (limit 600): ear IoU biased %.4f vs unbiased %.4f (%s); "
      "psnr outside edit region masked %.2f vs plain %.2f dB (%s); d_align masked %.5f vs "
      "plain %.5f - 0.01 (%s); trials ok %d, failed %d",
      elapsed, summary.biased_offtarget_iou, summary.unbiased_offtarget_iou,
      iou_gap ? "ok" : "VIOLATED", summary.masked_psnr_outside, summary.plain_psnr_outside,
      psnr_gap ? "ok" : "VIOLATED", summary.masked_d_align, summary.plain_d_align,
      align_ok ? "ok" : "VIOLATED", summary.ok_trials, summary.error_trials);
  return r;
}

// ---------------------------------------------------------------------------
// 8. Null-bias control: no coupling, so the two mask flavors must agree.

CheckResult criterion_null_bias() {
  ExperimentConfig cfg;
  cfg.output_dir = "";
  cfg.seed = 20260818;
  cfg.trials = 15;
  cfg.world.couplings.clear();  // statistically independent attributes
  // The IoU means come from the mask phase; one blend step keeps the edit
  // phase (irrelevant here) short.
  cfg.blend_steps = {50};

  const ExperimentResult res = run_experiment(cfg);
  const double gap =
      std::abs(res.summary.biased_offtarget_iou - res.summary.unbiased_offtarget_iou);
  CheckResult r;
  r.pass = res.all_ok && gap < 0.05;
  r.detail = strf("coupling removed, 15 trials: ear IoU biased %.4f vs unbiased %.4f, |gap| %.4f "
                  "(tol 0.05)",
                  res.summary.biased_offtarget_iou, res.summary.unbiased_offtarget_iou, gap);
  return r;
}

// ---------------------------------------------------------------------------
// 9. Metric fixed points.

CheckResult criterion_metric_sanity() {
  const ImageTensor scene = render_scene(scene_of("teal", "scarf", "round"));
  RandomStream rng(909);
  const ImageTensor noise = rng.normal_image(16, 16, 3);

  const bool ssim_one = ssim(scene, scene) == 1.0 && ssim(noise, noise) == 1.0;

  double worst_psnr_gap = 0.0;
  for (const ImageTensor* img : {&scene, &noise}) {
    ImageTensor shifted = *img;
    for (double& v : shifted.data) v += 0.2;
    worst_psnr_gap = std::max(worst_psnr_gap, std::abs(psnr(*img, shifted) - 20.0));
  }

  const MixtureWorld world = make_world(default_world_config());
  const Condition c_src{{"accessory", "none"}};
  const Condition c_tgt{{"accessory", "scarf"}};
  const double d0 = directional_alignment(scene, scene, c_tgt, c_src, world);

  CheckResult r;
  r.pass = ssim_one && worst_psnr_gap <= 1e-12 && d0 == 0.0;
  r.detail = strf("ssim(x,x) %s 1.0; |psnr(x, x+0.2) - 20 dB| = %.1e (tol 1e-12); "
                  "d_align at the source = %.1f",
                  ssim_one ? "==" : "!=", worst_psnr_gap, d0);
  return r;
}

// ---------------------------------------------------------------------------
// 10. Byte-identical outputs for equal config and seed.

std::map<std::string, std::vector<char>> read_tree(const fs::path& root) {
  std::map<std::string, std::vector<char>> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    files[fs::relative(entry.path(), root).string()] =
        std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return files;
}

CheckResult criterion_reproducibility(const std::string& cli_path) {
  const fs::path root = fs::temp_directory_path() / "dualcycle-acceptance-repro";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path out_a = root / "a", out_b = root / "b";

  const std::string config = R"({
  "seed": 424242,
  "trials": 2,
  "decode_scales": [1.0, 2.0],
  "noise_steps": [60, 50],
  "blend_steps": [50],
  "tuples": [{"name": "orange-scarf",
              "source": {"body-color": "orange", "accessory": "none", "ear-style": "pointy"},
              "c_src": {"body-color": "orange", "accessory": "none"},
              "c_tgt": {"body-color": "orange", "accessory": "scarf"}}]
})";

  bool ran_cli = false;
  if (!cli_path.empty()) {
    const fs::path cfg_path = root / "config.json";
    std::ofstream(cfg_path) << config;
    for (const fs::path& out : {out_a, out_b}) {
      const std::string cmd =
          cli_path + " run -q -c " + cfg_path.string() + " -o " + out.string();
      const int status = std::system(cmd.c_str());
      if (status != 0) {
        CheckResult r;
        r.pass = false;
        r.detail = strf("CLI run exited with status %d", status);
        fs::remove_all(root);
        return r;
      }
    }
    ran_cli = true;
  } else {
    ExperimentConfig cfg = parse_experiment_config(config);
    cfg.output_dir = out_a.string();
    run_experiment(cfg);
    cfg.output_dir = out_b.string();
    run_experiment(cfg);
  }

  const auto tree_a = read_tree(out_a);
  const auto tree_b = read_tree(out_b);
  int pngs = 0, csvs = 0, pgms = 0;
  for (const auto& [name, bytes] : tree_a) {
    (void)bytes;
    if (name.size() > 4 && name.substr(name.size() - 4) == ".png") ++pngs;
    if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") ++csvs;
    if (name.size() > 4 && name.substr(name.size() - 4) == ".pgm") ++pgms;
  }
  const bool identical = tree_a == tree_b;
  const bool covered = pngs > 0 && csvs > 0 && pgms > 0;
  fs::remove_all(root);

  CheckResult r;
  r.pass = identical && covered;
  r.detail = strf("two %s runs, %zu files each (%d png, %d pgm, %d csv): %s", ran_cli ? "CLI" : "library",
                  tree_a.size(), pngs, pgms, csvs,
                  identical ? "byte-identical" : "DIFFER");
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli_path = argc > 1 ? argv[1] : "";

  struct Criterion {
    int num;
    const char* name;
    std::function<CheckResult()> run;
  };
  const ExperimentSummary* bias_summary = nullptr;
  const std::vector<Criterion> criteria = {
      {1, "inversion round trip", criterion_inversion},
      {2, "analytic denoiser vs quadrature", criterion_quadrature},
      {3, "head/tail decode composition", criterion_composition},
      {4, "identity cycles", criterion_identity_cycles},
      {5, "mask correctness", criterion_masks},
      {6, "blend identities", criterion_blend_identities},
      {7, "bias reproduction", [&] { return criterion_bias(&bias_summary); }},
      {8, "null-bias control", criterion_null_bias},
      {9, "metric sanity", criterion_metric_sanity},
      {10, "reproducibility", [&] { return criterion_reproducibility(cli_path); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    CheckResult result;
    try {
      result = c.run();
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = strf("exception: %s", e.what());
    }
    if (!result.pass) ++failures;
    std::printf("%s %2d %-34s %s\n", result.pass ? "PASS" : "FAIL", c.num, c.name,
                result.detail.c_str());
    std::fflush(stdout);
  }
  if (failures > 0) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
