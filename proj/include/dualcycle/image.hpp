#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dualcycle {

// Dense H x W x C raster of doubles, row-major with channels innermost.
// Pixel values are nominally in [-1, 1]; intermediate states of a diffusion
// chain may wander outside that range and that is fine.
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c);

  static ImageTensor constant(int h, int w, int c, double value);

  double& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  double at(int y, int x, int c) const { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }

  size_t size() const { return data.size(); }
  bool same_shape(const ImageTensor& other) const {
    return height == other.height && width == other.width && channels == other.channels;
  }
};

// Throws std::invalid_argument naming `what` when shapes differ.
void require_same_shape(const ImageTensor& a, const ImageTensor& b, const std::string& what);

double max_abs_diff(const ImageTensor& a, const ImageTensor& b);
double mean_squared_error(const ImageTensor& a, const ImageTensor& b);
bool bitwise_equal(const ImageTensor& a, const ImageTensor& b);

}  // namespace dualcycle
