#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualcycle/condition.hpp"
#include "dualcycle/editing.hpp"
#include "dualcycle/maskgen.hpp"
#include "dualcycle/scene.hpp"
#include "dualcycle/schedule.hpp"
#include "dualcycle/world.hpp"

namespace dualcycle {

struct ScheduleConfig {
  int steps = 100;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  double eta = 0.1;
};

struct WorldConfig {
  int canvas = 16;  // square side, multiple of 16
  int channels = 3;
  double pixel_noise = 0.05;
  std::vector<AttributeDef> attributes;  // empty: full renderer palette
  std::vector<Coupling> couplings;
};

struct MaskOptions {
  int grid_rows = 4;  // per quadrant; the assembled mask is 2x this
  int grid_cols = 4;
  double delta = 0.5;
  BinarizeMode mode = BinarizeMode::dissimilarity;
  bool plain_features = false;  // true: per-channel means only (ablation)
  double vote_threshold = 0.5;  // for averaging masks across trials
};

// One source image and the condition pair an edit moves it between. The
// conditions deliberately bind only some attributes; unbound ones are where
// prior-driven drift can show up.
struct EditTuple {
  std::string name;  // used in file names and records
  SceneSpec source;
  Condition c_source;
  Condition c_target;
};

// The measurement protocol's world: full palette, accessory=scarf coupled to
// ear-style=round at strength 0.95.
WorldConfig default_world_config();

struct ExperimentConfig {
  std::string output_dir = "out";
  uint64_t seed = 20260818;
  int trials = 15;
  ScheduleConfig schedule;
  WorldConfig world = default_world_config();
  double encode_scale = 1.0;
  std::vector<double> decode_scales = {1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
  std::vector<int> noise_steps = {85, 80, 75, 70, 60, 50};
  // Blend depths k; combinations with k > noise_step are skipped.
  std::vector<int> blend_steps = {85, 80, 75, 70, 60, 50};
  BlendMode blend_mode = BlendMode::replay;
  MaskOptions mask;
  std::vector<EditTuple> tuples;  // empty: default_tuples()
  bool run_ablation = false;
  bool run_baselines = true;
};

// Scarf-addition tuples for each body color. The source condition pins the
// accessory to none so the inverted decode removes the scarf; ear style is
// left unbound in both conditions, which is exactly where the coupling can
// pull the edit off target.
std::vector<EditTuple> default_tuples();

WorldConfig parse_world_config(const std::string& json_text);
ExperimentConfig parse_experiment_config(const std::string& json_text);
WorldConfig load_world_config(const std::string& path);
ExperimentConfig load_experiment_config(const std::string& path);

MixtureWorld make_world(const WorldConfig& cfg);
NoiseSchedule make_schedule(const ScheduleConfig& cfg);

}  // namespace dualcycle
