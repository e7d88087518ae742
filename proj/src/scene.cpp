#include "dualcycle/scene.hpp"

#include <array>
#include <stdexcept>

#include "dualcycle/errors.hpp"

namespace dualcycle {

namespace {

using Color = std::array<double, 3>;

constexpr Color kBackground = {0.85, 0.85, 0.85};
constexpr Color kEarBase = {-0.5, -0.5, -0.5};
// Ear style tints: faint, near-orthogonal color directions. Both properties
// are load-bearing for the bias-reproduction experiment. The magnitude sits
// in a narrow window: bright enough that by the low-noise end of a decode
// the pixel evidence pins whichever style the chain has committed to (so a
// re-encode of a drifted image keeps its drifted ears), yet faint enough
// that early in the chain, before the evidence sharpens, a strongly coupled
// conditional prior (0.95 coupling = 2.94 nats) can steer the style. The
// near-orthogonality keeps the two styles maximally separated in angle,
// which is what the cosine mask features respond to, independent of
// magnitude. Do not make these tints brighter, dimmer, or parallel.
constexpr Color kEarStylePointy = {0.08, -0.05, 0.02};
constexpr Color kEarStyleRound = {0.05, 0.08, -0.02};
constexpr Color kScarf = {0.9, -0.65, -0.6};

Color body_color(const std::string& value) {
  if (value == "orange") return {0.9, 0.15, -0.55};
  if (value == "gray") return {0.1, 0.1, 0.1};
  if (value == "teal") return {-0.4, 0.35, 0.45};
  throw VocabularyError("unknown body-color value: " + value);
}

// Geometry in 16x16 base units; a canvas of side 16*f scales every region by f.
//   ears:           rows [2,6), cols [2,6) and [10,14)
//   body:           rows [6,10) and [12,14), cols [2,14)
//   accessory band: rows [10,12), cols [2,14), plus draped ends at
//                   rows [6,8), cols [0,2) and [14,16)
// The top half of each ear block carries the style tint; the bottom half is
// the shared ear base color. The draped scarf ends put part of the accessory
// region into each top image quadrant, next to an ear: when two images are
// compared quadrant by quadrant with score normalization, an accessory edit
// then provides a strong in-quadrant change that faint incidental ear-style
// differences are measured against, instead of being stretched to full
// scale. Do not fold the drape back into the band rows.
enum class Zone { background, ear_top, ear_base, body, band, drape };

Zone zone_at(int by, int bx) {
  const bool ear_cols = (bx >= 2 && bx < 6) || (bx >= 10 && bx < 14);
  if (by >= 2 && by < 6 && ear_cols) {
    return by <= 3 ? Zone::ear_top : Zone::ear_base;
  }
  if (bx >= 2 && bx < 14) {
    if ((by >= 6 && by < 10) || (by >= 12 && by < 14)) return Zone::body;
    if (by >= 10 && by < 12) return Zone::band;
  }
  if (by >= 6 && by < 8 && (bx < 2 || bx >= 14)) return Zone::drape;
  return Zone::background;
}

void check_canvas(int height, int width, int channels) {
  if (height != width || height < 16 || height % 16 != 0) {
    throw std::invalid_argument("scene canvas must be square with side a positive multiple of 16");
  }
  if (channels != 3) {
    throw std::invalid_argument("scene canvas must have 3 channels");
  }
}

}  // namespace

Vocabulary::Vocabulary(std::vector<AttributeDef> attributes) : attrs_(std::move(attributes)) {
  const Vocabulary& full = builtin();
  for (const AttributeDef& def : attrs_) {
    const AttributeDef* known = full.find(def.name);
    if (known == nullptr) throw VocabularyError("unknown attribute: " + def.name);
    if (def.values.empty()) throw VocabularyError("attribute " + def.name + " has no values");
    for (const std::string& v : def.values) {
      bool ok = false;
      for (const std::string& kv : known->values) ok = ok || kv == v;
      if (!ok) throw VocabularyError("unknown value for " + def.name + ": " + v);
    }
  }
}

const Vocabulary& Vocabulary::builtin() {
  static const Vocabulary vocab = [] {
    Vocabulary v;
    v.attrs_ = {
        {"body-color", {"orange", "gray", "teal"}},
        {"accessory", {"none", "scarf"}},
        {"ear-style", {"pointy", "round"}},
    };
    return v;
  }();
  return vocab;
}

const AttributeDef* Vocabulary::find(const std::string& name) const {
  for (const AttributeDef& def : attrs_) {
    if (def.name == name) return &def;
  }
  return nullptr;
}

void Vocabulary::validate(const std::string& name, const std::string& value) const {
  const AttributeDef* def = find(name);
  if (def == nullptr) throw VocabularyError("unknown attribute: " + name);
  for (const std::string& v : def->values) {
    if (v == value) return;
  }
  throw VocabularyError("unknown value for " + name + ": " + value);
}

ImageTensor render_scene(const SceneSpec& spec) {
  check_canvas(spec.height, spec.width, spec.channels);
  for (const AttributeDef& def : Vocabulary::builtin().attributes()) {
    auto it = spec.assignment.find(def.name);
    if (it == spec.assignment.end()) {
      throw VocabularyError("scene is missing attribute: " + def.name);
    }
    Vocabulary::builtin().validate(def.name, it->second);
  }

  const Color body = body_color(spec.assignment.at("body-color"));
  const bool scarf = spec.assignment.at("accessory") == "scarf";
  const bool pointy = spec.assignment.at("ear-style") == "pointy";
  const Color ear_top = pointy ? kEarStylePointy : kEarStyleRound;
  const Color band = scarf ? kScarf : kBackground;

  const int f = spec.height / 16;
  ImageTensor img(spec.height, spec.width, 3);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const Color* color = &kBackground;
      switch (zone_at(y / f, x / f)) {
        case Zone::ear_top: color = &ear_top; break;
        case Zone::ear_base: color = &kEarBase; break;
        case Zone::body: color = &body; break;
        case Zone::band: color = &band; break;
        case Zone::drape: color = &band; break;
        case Zone::background: break;
      }
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = (*color)[c];
    }
  }
  return img;
}

std::vector<std::string> region_names() { return {"background", "body", "accessory-band", "ears"}; }

std::vector<uint8_t> region_pixels(const std::string& region, int height, int width) {
  check_canvas(height, width, 3);
  enum class Kind { background, body, band, ears } kind;
  if (region == "background") {
    kind = Kind::background;
  } else if (region == "body") {
    kind = Kind::body;
  } else if (region == "accessory-band") {
    kind = Kind::band;
  } else if (region == "ears") {
    kind = Kind::ears;
  } else {
    throw std::invalid_argument("unknown region: " + region);
  }
  const int f = height / 16;
  std::vector<uint8_t> mask(static_cast<size_t>(height) * width, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Zone z = zone_at(y / f, x / f);
      bool in = false;
      switch (kind) {
        case Kind::background: in = z == Zone::background; break;
        case Kind::body: in = z == Zone::body; break;
        case Kind::band: in = z == Zone::band || z == Zone::drape; break;
        case Kind::ears: in = z == Zone::ear_base || z == Zone::ear_top; break;
      }
      mask[static_cast<size_t>(y) * width + x] = in ? 1 : 0;
    }
  }
  return mask;
}

std::string attribute_region(const std::string& attribute) {
  if (attribute == "body-color") return "body";
  if (attribute == "accessory") return "accessory-band";
  if (attribute == "ear-style") return "ears";
  throw std::invalid_argument("unknown attribute: " + attribute);
}

}  // namespace dualcycle
