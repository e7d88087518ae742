#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dualcycle/image.hpp"

namespace dualcycle {

struct AttributeDef {
  std::string name;
  std::vector<std::string> values;
};

// The set of attributes and values in play. The renderer understands a fixed
// palette (see Vocabulary::builtin()); a vocabulary may restrict it to a
// subset of values per attribute but cannot invent new ones.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<AttributeDef> attributes);

  // Full renderer palette:
  //   body-color: orange | gray | teal
  //   accessory:  none | scarf
  //   ear-style:  pointy | round
  static const Vocabulary& builtin();

  const std::vector<AttributeDef>& attributes() const { return attrs_; }
  const AttributeDef* find(const std::string& name) const;

  // Throws VocabularyError if the attribute or value is not in this vocabulary.
  void validate(const std::string& name, const std::string& value) const;

 private:
  std::vector<AttributeDef> attrs_;
};

// Complete attribute assignment plus canvas dimensions. The canvas must be
// square with side a multiple of 16 and have 3 channels; every pixel region
// scales uniformly with the canvas.
struct SceneSpec {
  std::map<std::string, std::string> assignment;
  int height = 16;
  int width = 16;
  int channels = 3;
};

// Deterministic rasterization. Each attribute owns a fixed, disjoint pixel
// region (see region_pixels); pixels outside an attribute's region are
// bit-identical across its values.
ImageTensor render_scene(const SceneSpec& spec);

// Region names: "background", "body", "accessory-band", "ears".
std::vector<std::string> region_names();

// 0/1 per-pixel membership mask (H*W entries, row-major).
std::vector<uint8_t> region_pixels(const std::string& region, int height, int width);

// Region controlled by an attribute ("body-color" -> "body", ...).
std::string attribute_region(const std::string& attribute);

}  // namespace dualcycle
