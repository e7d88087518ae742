#include "dualcycle/image.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace dualcycle {

ImageTensor::ImageTensor(int h, int w, int c) : height(h), width(w), channels(c) {
  if (h <= 0 || w <= 0 || c <= 0) {
    throw std::invalid_argument("ImageTensor: dimensions must be positive");
  }
  data.assign(static_cast<size_t>(h) * w * c, 0.0);
}

ImageTensor ImageTensor::constant(int h, int w, int c, double value) {
  ImageTensor img(h, w, c);
  for (double& v : img.data) v = value;
  return img;
}

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(what + ": shape mismatch (" + std::to_string(a.height) + "x" +
                                std::to_string(a.width) + "x" + std::to_string(a.channels) + " vs " +
                                std::to_string(b.height) + "x" + std::to_string(b.width) + "x" +
                                std::to_string(b.channels) + ")");
  }
}

double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  }
  return m;
}

double mean_squared_error(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "mean_squared_error");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.data.size());
}

bool bitwise_equal(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

}  // namespace dualcycle
