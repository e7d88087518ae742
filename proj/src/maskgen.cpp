#include "dualcycle/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace dualcycle {

FeatureExtractor::FeatureExtractor(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("feature grid must be at least 1x1");
}

FeatureGrid FeatureExtractor::extract(const ImageTensor& img) const {
  if (img.height < rows_ || img.width < cols_)
    throw std::invalid_argument("image is smaller than the feature grid");
  FeatureGrid grid;
  grid.rows = rows_;
  grid.cols = cols_;
  grid.depth = depth(img.channels);
  grid.values.assign(static_cast<size_t>(rows_) * cols_ * grid.depth, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const int y0 = i * img.height / rows_;
    const int y1 = (i + 1) * img.height / rows_;
    for (int j = 0; j < cols_; ++j) {
      const int x0 = j * img.width / cols_;
      const int x1 = (j + 1) * img.width / cols_;
      cell_features(img, y0, y1, x0, x1, &grid.at(i, j, 0));
    }
  }
  return grid;
}

void PatchStatsExtractor::cell_features(const ImageTensor& img, int y0, int y1, int x0, int x1,
                                        double* features) const {
  const int n = (y1 - y0) * (x1 - x0);
  for (int c = 0; c < img.channels; ++c) {
    double sum = 0.0, sum_sq = 0.0;
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) {
        const double v = img.at(y, x, c);
        sum += v;
        sum_sq += v * v;
      }
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);

    double hsum = 0.0;
    const int hcount = (y1 - y0) * (x1 - x0 - 1);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1 - 1; ++x) hsum += std::abs(img.at(y, x + 1, c) - img.at(y, x, c));

    double vsum = 0.0;
    const int vcount = (y1 - y0 - 1) * (x1 - x0);
    for (int y = y0; y < y1 - 1; ++y)
      for (int x = x0; x < x1; ++x) vsum += std::abs(img.at(y + 1, x, c) - img.at(y, x, c));

    features[4 * c + 0] = mean;
    features[4 * c + 1] = std::sqrt(var);
    features[4 * c + 2] = hcount > 0 ? hsum / hcount : 0.0;
    features[4 * c + 3] = vcount > 0 ? vsum / vcount : 0.0;
  }
}

void PatchMeanExtractor::cell_features(const ImageTensor& img, int y0, int y1, int x0, int x1,
                                       double* features) const {
  const int n = (y1 - y0) * (x1 - x0);
  for (int c = 0; c < img.channels; ++c) {
    double sum = 0.0;
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) sum += img.at(y, x, c);
    features[c] = sum / n;
  }
}

SimilarityGrid similarity(const FeatureGrid& a, const FeatureGrid& b) {
  if (a.rows != b.rows || a.cols != b.cols || a.depth != b.depth)
    throw std::invalid_argument("feature grids disagree in shape");
  SimilarityGrid s;
  s.rows = a.rows;
  s.cols = a.cols;
  s.values.assign(static_cast<size_t>(a.rows) * a.cols, 0.0);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) {
      double dot = 0.0, na = 0.0, nb = 0.0;
      bool identical = true;
      for (int k = 0; k < a.depth; ++k) {
        const double va = a.at(i, j, k), vb = b.at(i, j, k);
        identical = identical && va == vb;
        dot += va * vb;
        na += va * va;
        nb += vb * vb;
      }
      // Identical cells are maximally similar by definition. Computing the
      // cosine instead would leave ~1e-16 of rounding noise, and min-max
      // normalization downstream stretches any nonzero spread to full range.
      if (identical) {
        s.at(i, j) = 1.0;
      } else {
        s.at(i, j) = (na == 0.0 || nb == 0.0) ? 0.0 : dot / (std::sqrt(na) * std::sqrt(nb));
      }
    }
  return s;
}

EditMask binarize(const SimilarityGrid& s, double delta, BinarizeMode mode) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in [0, 1]");
  std::vector<double> score(s.values.size());
  for (size_t i = 0; i < s.values.size(); ++i)
    score[i] = mode == BinarizeMode::dissimilarity ? 1.0 - s.values[i] : std::abs(s.values[i]);

  const auto [lo_it, hi_it] = std::minmax_element(score.begin(), score.end());
  const double lo = *lo_it, hi = *hi_it;
  EditMask mask;
  mask.rows = s.rows;
  mask.cols = s.cols;
  mask.values.assign(score.size(), 0);
  // A grid whose total contrast sits at the rounding floor carries no signal;
  // normalizing it would promote numerical dust to full-range scores.
  if (hi - lo <= 1e-12) return mask;
  for (size_t i = 0; i < score.size(); ++i)
    mask.values[i] = (score[i] - lo) / (hi - lo) > delta ? 1 : 0;
  return mask;
}

namespace {

ImageTensor crop(const ImageTensor& img, int y0, int y1, int x0, int x1) {
  ImageTensor out(y1 - y0, x1 - x0, img.channels);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(y - y0, x - x0, c) = img.at(y, x, c);
  return out;
}

}  // namespace

EditMask grid_refine(const ImageTensor& a, const ImageTensor& b, const FeatureExtractor& extractor,
                     double delta, BinarizeMode mode) {
  require_same_shape(a, b, "grid_refine");
  if (a.height % 2 != 0 || a.width % 2 != 0)
    throw std::invalid_argument("grid_refine needs even image dimensions");
  const int hy = a.height / 2, hx = a.width / 2;
  const int m = extractor.rows(), n = extractor.cols();

  EditMask out;
  out.rows = 2 * m;
  out.cols = 2 * n;
  out.values.assign(static_cast<size_t>(4) * m * n, 0);
  for (int qi = 0; qi < 2; ++qi)
    for (int qj = 0; qj < 2; ++qj) {
      const int y0 = qi * hy, x0 = qj * hx;
      const auto qa = crop(a, y0, y0 + hy, x0, x0 + hx);
      const auto qb = crop(b, y0, y0 + hy, x0, x0 + hx);
      const EditMask quadrant = binarize(similarity(extractor.extract(qa), extractor.extract(qb)),
                                         delta, mode);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(qi * m + i, qj * n + j) = quadrant.at(i, j);
    }
  return out;
}

EditMask average_masks(std::span<const EditMask> masks, double threshold) {
  if (masks.empty()) throw std::invalid_argument("average_masks needs at least one mask");
  const int rows = masks[0].rows, cols = masks[0].cols;
  for (const auto& m : masks)
    if (m.rows != rows || m.cols != cols)
      throw std::invalid_argument("average_masks: masks disagree in shape");

  EditMask out;
  out.rows = rows;
  out.cols = cols;
  out.values.assign(static_cast<size_t>(rows) * cols, 0);
  for (size_t i = 0; i < out.values.size(); ++i) {
    double sum = 0.0;
    for (const auto& m : masks) sum += m.values[i];
    out.values[i] = sum / static_cast<double>(masks.size()) > threshold ? 1 : 0;
  }
  return out;
}

EditMask resize_mask(const EditMask& mask, int height, int width) {
  if (height < mask.rows || width < mask.cols)
    throw std::invalid_argument("resize_mask only upscales");
  EditMask out;
  out.rows = height;
  out.cols = width;
  out.values.assign(static_cast<size_t>(height) * width, 0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out.at(y, x) = mask.at(y * mask.rows / height, x * mask.cols / width);
  return out;
}

double mask_area_fraction(const EditMask& mask) {
  if (mask.values.empty()) return 0.0;
  double sum = 0.0;
  for (uint8_t v : mask.values) sum += v;
  return sum / static_cast<double>(mask.values.size());
}

double mask_region_iou(const EditMask& pixel_mask, const std::vector<uint8_t>& region) {
  if (region.size() != pixel_mask.values.size())
    throw std::invalid_argument("mask_region_iou: size mismatch");
  int inter = 0, uni = 0;
  for (size_t i = 0; i < region.size(); ++i) {
    const bool a = pixel_mask.values[i] != 0, b = region[i] != 0;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

double mask_iou(const EditMask& a, const EditMask& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("mask_iou: masks disagree in shape");
  return mask_region_iou(a, b.values);
}

std::string mask_to_json(const EditMask& mask) {
  std::string out = "[";
  for (int i = 0; i < mask.rows; ++i) {
    if (i > 0) out += ",";
    out += "[";
    for (int j = 0; j < mask.cols; ++j) {
      if (j > 0) out += ",";
      out += mask.at(i, j) ? "1" : "0";
    }
    out += "]";
  }
  out += "]";
  return out;
}

}  // namespace dualcycle
