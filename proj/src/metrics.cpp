#include "dualcycle/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace dualcycle {

namespace {

constexpr double kPeak = 2.0;

double mse_to_psnr(double mse) {
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(kPeak * kPeak / mse));
}

}  // namespace

double psnr(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "psnr");
  return mse_to_psnr(mean_squared_error(a, b));
}

double psnr_outside(const ImageTensor& a, const ImageTensor& b, const std::vector<uint8_t>& region) {
  require_same_shape(a, b, "psnr_outside");
  if (region.size() != static_cast<size_t>(a.height) * a.width)
    throw std::invalid_argument("psnr_outside: region size disagrees with the image");
  double sum = 0.0;
  long count = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      if (region[static_cast<size_t>(y) * a.width + x]) continue;
      for (int c = 0; c < a.channels; ++c) {
        const double d = a.at(y, x, c) - b.at(y, x, c);
        sum += d * d;
        ++count;
      }
    }
  if (count == 0) throw std::invalid_argument("psnr_outside: region covers the whole image");
  return mse_to_psnr(sum / count);
}

double psnr_outside(const ImageTensor& a, const ImageTensor& b, const EditMask& mask) {
  if (mask.rows != a.height || mask.cols != a.width)
    throw std::invalid_argument("psnr_outside: mask geometry disagrees with the image");
  return psnr_outside(a, b, mask.values);
}

double ssim(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "ssim");
  constexpr int kWindow = 8, kStride = 4;
  if (a.height < kWindow || a.width < kWindow)
    throw std::invalid_argument("ssim needs images at least 8x8");
  constexpr double kC1 = (0.01 * kPeak) * (0.01 * kPeak);
  constexpr double kC2 = (0.03 * kPeak) * (0.03 * kPeak);
  constexpr int kN = kWindow * kWindow;

  double total = 0.0;
  long windows = 0;
  for (int c = 0; c < a.channels; ++c)
    for (int y0 = 0; y0 + kWindow <= a.height; y0 += kStride)
      for (int x0 = 0; x0 + kWindow <= a.width; x0 += kStride) {
        double sa = 0.0, sb = 0.0;
        for (int y = y0; y < y0 + kWindow; ++y)
          for (int x = x0; x < x0 + kWindow; ++x) {
            sa += a.at(y, x, c);
            sb += b.at(y, x, c);
          }
        const double ma = sa / kN, mb = sb / kN;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (int y = y0; y < y0 + kWindow; ++y)
          for (int x = x0; x < x0 + kWindow; ++x) {
            const double da = a.at(y, x, c) - ma;
            const double db = b.at(y, x, c) - mb;
            va += da * da;
            vb += db * db;
            cov += da * db;
          }
        va /= kN;
        vb /= kN;
        cov /= kN;
        const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
        const double den = (ma * ma + mb * mb + kC1) * (va + vb + kC2);
        total += num / den;
        ++windows;
      }
  return total / windows;
}

double alignment(const ImageTensor& x, const Condition& c, const MixtureWorld& world) {
  return log_likelihood(x, c, world) / (static_cast<double>(x.height) * x.width * x.channels);
}

double directional_alignment(const ImageTensor& x_edit, const ImageTensor& x_source,
                             const Condition& c_target, const Condition& c_source,
                             const MixtureWorld& world) {
  const double edit_pref = alignment(x_edit, c_target, world) - alignment(x_edit, c_source, world);
  const double src_pref =
      alignment(x_source, c_target, world) - alignment(x_source, c_source, world);
  return edit_pref - src_pref;
}

ScoreReport score_edit(const ImageTensor& x_edit, const ImageTensor& x_source,
                       const Condition& c_target, const Condition& c_source,
                       const MixtureWorld& world) {
  ScoreReport report;
  report.psnr = psnr(x_edit, x_source);
  report.ssim = ssim(x_edit, x_source);
  report.align = alignment(x_edit, c_target, world);
  report.d_align = directional_alignment(x_edit, x_source, c_target, c_source, world);
  return report;
}

}  // namespace dualcycle
