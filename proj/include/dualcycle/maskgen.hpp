#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dualcycle/image.hpp"

namespace dualcycle {

// Per-cell feature vectors over an m x n partition of an image.
struct FeatureGrid {
  int rows = 0, cols = 0, depth = 0;
  std::vector<double> values;  // rows x cols x depth, row-major
  double& at(int i, int j, int k) { return values[(static_cast<size_t>(i) * cols + j) * depth + k]; }
  double at(int i, int j, int k) const { return values[(static_cast<size_t>(i) * cols + j) * depth + k]; }
};

struct SimilarityGrid {
  int rows = 0, cols = 0;
  std::vector<double> values;  // in [-1, 1]
  double& at(int i, int j) { return values[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return values[static_cast<size_t>(i) * cols + j]; }
};

// Binary cell (or pixel) mask; values are strictly 0 or 1.
struct EditMask {
  int rows = 0, cols = 0;
  std::vector<uint8_t> values;
  uint8_t& at(int i, int j) { return values[static_cast<size_t>(i) * cols + j]; }
  uint8_t at(int i, int j) const { return values[static_cast<size_t>(i) * cols + j]; }
};

// Maps an image to a FeatureGrid over a fixed m x n cell partition (cell
// boundaries at floor(i*H/m), so the grid tiles any image at least as large
// as itself). Implementations must be deterministic.
class FeatureExtractor {
 public:
  FeatureExtractor(int rows, int cols);
  virtual ~FeatureExtractor() = default;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  virtual int depth(int channels) const = 0;
  FeatureGrid extract(const ImageTensor& img) const;

 protected:
  // Fills features[0..depth) for the cell covering rows [y0,y1) x cols [x0,x1).
  virtual void cell_features(const ImageTensor& img, int y0, int y1, int x0, int x1,
                             double* features) const = 0;

 private:
  int rows_, cols_;
};

// Default feature set: per channel the cell mean, population standard
// deviation, mean absolute horizontal difference, and mean absolute vertical
// difference (depth 4*C). The difference terms are 0 for single-pixel rows
// or columns.
class PatchStatsExtractor : public FeatureExtractor {
 public:
  using FeatureExtractor::FeatureExtractor;
  int depth(int channels) const override { return 4 * channels; }

 protected:
  void cell_features(const ImageTensor& img, int y0, int y1, int x0, int x1,
                     double* features) const override;
};

// Reduced feature set for ablation: per-channel cell means only (depth C).
class PatchMeanExtractor : public FeatureExtractor {
 public:
  using FeatureExtractor::FeatureExtractor;
  int depth(int channels) const override { return channels; }

 protected:
  void cell_features(const ImageTensor& img, int y0, int y1, int x0, int x1,
                     double* features) const override;
};

// Entrywise cosine similarity. Bitwise-identical feature vectors score
// exactly 1; cells where either differing vector has zero norm score 0.
SimilarityGrid similarity(const FeatureGrid& a, const FeatureGrid& b);

// How a similarity grid is turned into change scores before thresholding:
//   dissimilarity: score = 1 - S      (marks cells that changed; default)
//   similarity:    score = |S|        (marks cells whose normalized absolute
//                                      cosine is high; kept selectable
//                                      because it flips which cells an edit
//                                      marks, and both behaviors are useful
//                                      for diagnosis)
enum class BinarizeMode { dissimilarity, similarity };

// Min-max normalizes the scores and marks cells strictly above delta.
// A degenerate grid (score spread at or below the 1e-12 rounding floor)
// yields the all-zero mask rather than normalizing numerical dust.
EditMask binarize(const SimilarityGrid& s, double delta, BinarizeMode mode);

// Quadrant-refined mask: splits both images into 2x2 quadrants (H and W must
// be even), runs extract -> similarity -> binarize independently per
// quadrant with the given extractor, and assembles the four m x n masks into
// one 2m x 2n mask. Per-quadrant normalization means a quadrant with no
// changes stays all-zero instead of having its noise floor stretched.
EditMask grid_refine(const ImageTensor& a, const ImageTensor& b, const FeatureExtractor& extractor,
                     double delta, BinarizeMode mode);

// Elementwise mean across masks, re-binarized strictly above `threshold`
// (majority vote at the default 0.5).
EditMask average_masks(std::span<const EditMask> masks, double threshold = 0.5);

// Nearest-neighbor upscale to height x width (never smaller than the mask).
EditMask resize_mask(const EditMask& mask, int height, int width);

double mask_area_fraction(const EditMask& mask);

// Intersection-over-union with a 0/1 pixel region of the same geometry.
// Returns 0 when both are empty.
double mask_region_iou(const EditMask& pixel_mask, const std::vector<uint8_t>& region);

double mask_iou(const EditMask& a, const EditMask& b);

// JSON array-of-arrays of 0/1 ints, e.g. [[0,1],[1,0]].
std::string mask_to_json(const EditMask& mask);

}  // namespace dualcycle
