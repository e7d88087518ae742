#pragma once

#include <cstdint>
#include <vector>

#include "dualcycle/image.hpp"
#include "dualcycle/maskgen.hpp"
#include "dualcycle/world.hpp"

namespace dualcycle {

// Pixel values live in [-1, 1], so the PSNR peak is 2.0. Identical images
// (mse = 0) report the cap value 99.0 instead of infinity.
inline constexpr double kPsnrCap = 99.0;

double psnr(const ImageTensor& a, const ImageTensor& b);

// PSNR restricted to pixels where region = 0 (the pixels an edit was
// supposed to leave alone). Throws if the region covers the whole image.
double psnr_outside(const ImageTensor& a, const ImageTensor& b, const std::vector<uint8_t>& region);
double psnr_outside(const ImageTensor& a, const ImageTensor& b, const EditMask& mask);

// Mean structural similarity over 8x8 windows placed at stride 4, averaged
// across channels. Stabilizers C1 = (0.01 * 2)^2 and C2 = (0.03 * 2)^2 match
// the [-1, 1] range. ssim(x, x) evaluates to exactly 1.0: both windows see
// the same sums, so numerator and denominator come out bitwise equal.
double ssim(const ImageTensor& a, const ImageTensor& b);

// Per-entry average log-likelihood, so values are comparable across sizes.
double alignment(const ImageTensor& x, const Condition& c, const MixtureWorld& world);

// How much an edit moved toward the target condition relative to the source
// image's own preference:
//   [A(x_edit, c_tgt) - A(x_edit, c_src)] - [A(x_src, c_tgt) - A(x_src, c_src)]
// Positive means the edit is better explained by the target than the source
// was. Swapping x_edit and x_src negates the value.
double directional_alignment(const ImageTensor& x_edit, const ImageTensor& x_source,
                             const Condition& c_target, const Condition& c_source,
                             const MixtureWorld& world);

struct ScoreReport {
  double psnr = 0.0;     // x_edit vs x_source
  double ssim = 0.0;     // x_edit vs x_source
  double align = 0.0;    // alignment(x_edit, c_target)
  double d_align = 0.0;  // directional_alignment
};

ScoreReport score_edit(const ImageTensor& x_edit, const ImageTensor& x_source,
                       const Condition& c_target, const Condition& c_source,
                       const MixtureWorld& world);

}  // namespace dualcycle
