#include "dualcycle/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dualcycle {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

// Typo guard: every object must only carry keys the schema knows about.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(where, "unknown key \"" + key + "\"");
  }
}

const json& require(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where, std::string("missing key \"") + key + "\"");
  return j.at(key);
}

// "attribute=value" -> pair; used by couplings for brevity.
std::pair<std::string, std::string> split_assignment(const std::string& text, const std::string& where) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    fail(where, "expected \"attribute=value\", got \"" + text + "\"");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

Condition parse_condition(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "condition must be an object of attribute: value pairs");
  Condition c;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_string()) fail(where, "value of \"" + key + "\" must be a string");
    c.set(key, value.get<std::string>());
  }
  return c;
}

Coupling parse_coupling(const json& j, const std::string& where) {
  check_keys(j, where, {"trigger", "coupled", "strength"});
  Coupling coupling;
  std::tie(coupling.trigger_attribute, coupling.trigger_value) =
      split_assignment(require(j, where, "trigger").get<std::string>(), where + ".trigger");
  std::tie(coupling.coupled_attribute, coupling.coupled_value) =
      split_assignment(require(j, where, "coupled").get<std::string>(), where + ".coupled");
  coupling.strength = require(j, where, "strength").get<double>();
  return coupling;
}

WorldConfig parse_world(const json& j, const std::string& where) {
  check_keys(j, where, {"canvas", "channels", "pixel_noise", "attributes", "couplings"});
  WorldConfig cfg;
  if (j.contains("canvas")) cfg.canvas = j.at("canvas").get<int>();
  if (j.contains("channels")) cfg.channels = j.at("channels").get<int>();
  if (j.contains("pixel_noise")) cfg.pixel_noise = j.at("pixel_noise").get<double>();
  if (j.contains("attributes")) {
    for (size_t i = 0; i < j.at("attributes").size(); ++i) {
      const json& a = j.at("attributes").at(i);
      const std::string at = where + ".attributes[" + std::to_string(i) + "]";
      check_keys(a, at, {"name", "values"});
      AttributeDef def;
      def.name = require(a, at, "name").get<std::string>();
      for (const auto& v : require(a, at, "values")) def.values.push_back(v.get<std::string>());
      cfg.attributes.push_back(std::move(def));
    }
  }
  if (j.contains("couplings")) {
    for (size_t i = 0; i < j.at("couplings").size(); ++i)
      cfg.couplings.push_back(parse_coupling(j.at("couplings").at(i),
                                             where + ".couplings[" + std::to_string(i) + "]"));
  }
  return cfg;
}

EditTuple parse_tuple(const json& j, const std::string& where, const WorldConfig& world) {
  check_keys(j, where, {"name", "source", "c_src", "c_tgt"});
  EditTuple tuple;
  tuple.name = require(j, where, "name").get<std::string>();
  const json& src = require(j, where, "source");
  if (!src.is_object()) fail(where + ".source", "must be an attribute: value object");
  for (const auto& [key, value] : src.items())
    tuple.source.assignment[key] = value.get<std::string>();
  tuple.source.height = world.canvas;
  tuple.source.width = world.canvas;
  tuple.source.channels = world.channels;
  tuple.c_source = parse_condition(require(j, where, "c_src"), where + ".c_src");
  tuple.c_target = parse_condition(require(j, where, "c_tgt"), where + ".c_tgt");
  return tuple;
}

json parse_text(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw std::invalid_argument("config: malformed JSON");
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<EditTuple> default_tuples() {
  std::vector<EditTuple> tuples;
  for (const std::string color : {"orange", "gray", "teal"}) {
    EditTuple t;
    t.name = color + "-scarf";
    t.source.assignment = {
        {"body-color", color}, {"accessory", "none"}, {"ear-style", "pointy"}};
    t.c_source = Condition{{"body-color", color}, {"accessory", "none"}};
    t.c_target = Condition{{"body-color", color}, {"accessory", "scarf"}};
    tuples.push_back(std::move(t));
  }
  return tuples;
}

WorldConfig default_world_config() {
  WorldConfig cfg;
  cfg.couplings.push_back({"accessory", "scarf", "ear-style", "round", 0.95});
  return cfg;
}

WorldConfig parse_world_config(const std::string& json_text) {
  return parse_world(parse_text(json_text), "world");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json j = parse_text(json_text);
  check_keys(j, "experiment",
             {"output_dir", "seed", "trials", "schedule", "world", "encode_scale", "decode_scales",
              "noise_steps", "blend_steps", "blend_mode", "mask", "tuples", "run_ablation",
              "run_baselines"});
  ExperimentConfig cfg;
  cfg.world = default_world_config();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
  if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    check_keys(s, "schedule", {"steps", "beta_min", "beta_max", "eta"});
    if (s.contains("steps")) cfg.schedule.steps = s.at("steps").get<int>();
    if (s.contains("beta_min")) cfg.schedule.beta_min = s.at("beta_min").get<double>();
    if (s.contains("beta_max")) cfg.schedule.beta_max = s.at("beta_max").get<double>();
    if (s.contains("eta")) cfg.schedule.eta = s.at("eta").get<double>();
  }
  if (j.contains("world")) cfg.world = parse_world(j.at("world"), "world");
  if (j.contains("encode_scale")) cfg.encode_scale = j.at("encode_scale").get<double>();
  if (j.contains("decode_scales"))
    cfg.decode_scales = j.at("decode_scales").get<std::vector<double>>();
  if (j.contains("noise_steps")) cfg.noise_steps = j.at("noise_steps").get<std::vector<int>>();
  if (j.contains("blend_steps")) cfg.blend_steps = j.at("blend_steps").get<std::vector<int>>();
  if (j.contains("blend_mode")) {
    const std::string mode = j.at("blend_mode").get<std::string>();
    if (mode == "replay") cfg.blend_mode = BlendMode::replay;
    else if (mode == "resample") cfg.blend_mode = BlendMode::resample;
    else fail("blend_mode", "expected \"replay\" or \"resample\", got \"" + mode + "\"");
  }
  if (j.contains("mask")) {
    const json& m = j.at("mask");
    check_keys(m, "mask",
               {"grid_rows", "grid_cols", "delta", "mode", "features", "vote_threshold"});
    if (m.contains("grid_rows")) cfg.mask.grid_rows = m.at("grid_rows").get<int>();
    if (m.contains("grid_cols")) cfg.mask.grid_cols = m.at("grid_cols").get<int>();
    if (m.contains("delta")) cfg.mask.delta = m.at("delta").get<double>();
    if (m.contains("mode")) {
      const std::string mode = m.at("mode").get<std::string>();
      if (mode == "dissimilarity") cfg.mask.mode = BinarizeMode::dissimilarity;
      else if (mode == "similarity") cfg.mask.mode = BinarizeMode::similarity;
      else fail("mask.mode", "expected \"dissimilarity\" or \"similarity\", got \"" + mode + "\"");
    }
    if (m.contains("features")) {
      const std::string features = m.at("features").get<std::string>();
      if (features == "stats") cfg.mask.plain_features = false;
      else if (features == "means") cfg.mask.plain_features = true;
      else fail("mask.features", "expected \"stats\" or \"means\", got \"" + features + "\"");
    }
    if (m.contains("vote_threshold")) cfg.mask.vote_threshold = m.at("vote_threshold").get<double>();
  }
  if (j.contains("tuples")) {
    for (size_t i = 0; i < j.at("tuples").size(); ++i)
      cfg.tuples.push_back(
          parse_tuple(j.at("tuples").at(i), "tuples[" + std::to_string(i) + "]", cfg.world));
  }
  if (j.contains("run_ablation")) cfg.run_ablation = j.at("run_ablation").get<bool>();
  if (j.contains("run_baselines")) cfg.run_baselines = j.at("run_baselines").get<bool>();

  if (cfg.trials < 1) fail("trials", "must be at least 1");
  if (cfg.decode_scales.empty()) fail("decode_scales", "must not be empty");
  if (cfg.noise_steps.empty()) fail("noise_steps", "must not be empty");
  if (cfg.blend_steps.empty()) fail("blend_steps", "must not be empty");
  for (int s : cfg.noise_steps)
    if (s < 1 || s > cfg.schedule.steps) fail("noise_steps", "value outside [1, steps]");
  for (int k : cfg.blend_steps)
    if (k < 1 || k > cfg.schedule.steps) fail("blend_steps", "value outside [1, steps]");
  return cfg;
}

WorldConfig load_world_config(const std::string& path) {
  return parse_world_config(read_file(path));
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_file(path));
}

MixtureWorld make_world(const WorldConfig& cfg) {
  const Vocabulary vocabulary =
      cfg.attributes.empty() ? Vocabulary::builtin() : Vocabulary(cfg.attributes);
  return build_world(vocabulary, cfg.couplings, cfg.pixel_noise, cfg.canvas, cfg.canvas,
                     cfg.channels);
}

NoiseSchedule make_schedule(const ScheduleConfig& cfg) {
  return make_schedule(cfg.steps, cfg.beta_min, cfg.beta_max, cfg.eta);
}

}  // namespace dualcycle
