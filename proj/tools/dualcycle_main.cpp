#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dualcycle/config.hpp"
#include "dualcycle/experiment.hpp"
#include "dualcycle/image_io.hpp"
#include "dualcycle/scene.hpp"

namespace dc = dualcycle;

namespace {

void apply_overrides(dc::ExperimentConfig& cfg, const std::string& output_dir,
                     const CLI::Option* seed_opt, uint64_t seed, const CLI::Option* trials_opt,
                     int trials) {
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (seed_opt->count() > 0) cfg.seed = seed;
  if (trials_opt->count() > 0) cfg.trials = trials;
}

dc::ExperimentConfig load_or_default(const std::string& config_path) {
  if (!config_path.empty()) return dc::load_experiment_config(config_path);
  dc::ExperimentConfig cfg;
  cfg.world = dc::default_world_config();
  return cfg;
}

void print_summary(const dc::ExperimentResult& result) {
  const auto& s = result.summary;
  std::printf("trials ok=%d error=%d\n", s.ok_trials, s.error_trials);
  std::printf("off-target IoU   biased=%.4f unbiased=%.4f\n", s.biased_offtarget_iou,
              s.unbiased_offtarget_iou);
  std::printf("psnr outside     plain=%.3f masked=%.3f\n", s.plain_psnr_outside,
              s.masked_psnr_outside);
  std::printf("d_align          plain=%.5f masked=%.5f\n", s.plain_d_align, s.masked_d_align);
  for (const dc::TupleArtifacts& t : result.tuples) {
    if (t.selected_noise_step < 0) {
      std::printf("%s: no completed edits\n", t.name.c_str());
      continue;
    }
    std::printf("%s: selected scale=%g noise_step=%d k=%d (d_align=%.5f)\n", t.name.c_str(),
                t.selected_scale, t.selected_noise_step, t.selected_blend_step,
                t.selected_d_align);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-cycle diffusion editing: experiments, masks, and scene rendering"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  uint64_t seed = 0;
  int trials = 0;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "full measurement protocol (cycles, masks, edits)");
  run->add_option("-c,--config", config_path, "experiment config JSON");
  run->add_option("-o,--output", output_dir, "output directory (overrides config)");
  CLI::Option* run_seed = run->add_option("--seed", seed, "master seed (overrides config)");
  CLI::Option* run_trials = run->add_option("--trials", trials, "trials per combination");
  run->add_flag("-q,--quiet", quiet, "suppress progress lines");

  CLI::App* ablate = app.add_subcommand("ablate", "mask-flavor ablation and reference baselines");
  ablate->add_option("-c,--config", config_path, "experiment config JSON");
  ablate->add_option("-o,--output", output_dir, "output directory (overrides config)");
  CLI::Option* ablate_seed = ablate->add_option("--seed", seed, "master seed (overrides config)");
  CLI::Option* ablate_trials = ablate->add_option("--trials", trials, "trials per combination");
  ablate->add_flag("-q,--quiet", quiet, "suppress progress lines");

  std::vector<std::string> mask_images;
  std::string mask_out = "mask.pgm", mask_json, mask_mode = "dissimilarity",
              mask_features = "stats";
  int mask_grid = 4;
  double mask_delta = 0.5;
  CLI::App* mask_cmd = app.add_subcommand("mask", "edit mask from two images of equal size");
  mask_cmd->add_option("images", mask_images, "two PNG files (before, after)")
      ->expected(2)
      ->required();
  mask_cmd->add_option("-o,--output", mask_out, "output PGM path");
  mask_cmd->add_option("--json", mask_json, "also write the mask as a JSON array");
  mask_cmd->add_option("--grid", mask_grid, "cells per quadrant side (result is 2x)");
  mask_cmd->add_option("--delta", mask_delta, "binarization threshold in [0, 1]");
  mask_cmd->add_option("--mode", mask_mode, "dissimilarity | similarity")
      ->check(CLI::IsMember({"dissimilarity", "similarity"}));
  mask_cmd->add_option("--features", mask_features, "stats | means")
      ->check(CLI::IsMember({"stats", "means"}));

  std::vector<std::string> render_sets;
  std::string render_out = "scene.png";
  int render_canvas = 16;
  CLI::App* render = app.add_subcommand("render", "rasterize a scene from attribute assignments");
  render->add_option("--set", render_sets, "attribute=value (repeat for each attribute)")
      ->required();
  render->add_option("--canvas", render_canvas, "square canvas side (multiple of 16)");
  render->add_option("-o,--output", render_out, "output PNG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      dc::ExperimentConfig cfg = load_or_default(config_path);
      apply_overrides(cfg, output_dir, run_seed, seed, run_trials, trials);
      const dc::ExperimentResult result = dc::run_experiment(cfg, quiet ? nullptr : &std::cout);
      print_summary(result);
      return result.all_ok ? 0 : 1;
    }
    if (ablate->parsed()) {
      dc::ExperimentConfig cfg = load_or_default(config_path);
      apply_overrides(cfg, output_dir, ablate_seed, seed, ablate_trials, trials);
      const dc::CompareResult result = dc::compare_modes(cfg, quiet ? nullptr : &std::cout);
      std::cout << dc::summary_csv(result.rows);
      return result.all_ok ? 0 : 1;
    }
    if (mask_cmd->parsed()) {
      const dc::ImageTensor a = dc::read_png(mask_images[0]);
      const dc::ImageTensor b = dc::read_png(mask_images[1]);
      const dc::BinarizeMode mode = mask_mode == "dissimilarity"
                                        ? dc::BinarizeMode::dissimilarity
                                        : dc::BinarizeMode::similarity;
      std::unique_ptr<dc::FeatureExtractor> extractor;
      if (mask_features == "means")
        extractor = std::make_unique<dc::PatchMeanExtractor>(mask_grid, mask_grid);
      else
        extractor = std::make_unique<dc::PatchStatsExtractor>(mask_grid, mask_grid);
      const dc::EditMask m = dc::grid_refine(a, b, *extractor, mask_delta, mode);
      dc::write_pgm(m, mask_out);
      if (!mask_json.empty()) {
        std::ofstream json(mask_json, std::ios::binary);
        if (!json) throw std::runtime_error("cannot open " + mask_json + " for writing");
        json << dc::mask_to_json(m) << '\n';
      }
      std::printf("%dx%d mask, area fraction %.4f -> %s\n", m.rows, m.cols,
                  dc::mask_area_fraction(m), mask_out.c_str());
      return 0;
    }
    if (render->parsed()) {
      dc::SceneSpec spec;
      spec.height = render_canvas;
      spec.width = render_canvas;
      for (const std::string& s : render_sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
          throw std::invalid_argument("--set expects attribute=value, got \"" + s + "\"");
        spec.assignment[s.substr(0, eq)] = s.substr(eq + 1);
      }
      dc::write_png(dc::render_scene(spec), render_out);
      std::printf("wrote %s\n", render_out.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
