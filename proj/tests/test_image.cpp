#include "dualcycle/image.hpp"

#include <stdexcept>

#include "doctest.h"

using dualcycle::ImageTensor;

TEST_CASE("image layout is row-major with interleaved channels") {
  ImageTensor img(2, 3, 2);
  CHECK(img.height == 2);
  CHECK(img.width == 3);
  CHECK(img.channels == 2);
  CHECK(img.size() == 12);
  CHECK(img.data.size() == 12);

  img.at(1, 2, 1) = 7.0;
  CHECK(img.data[(1 * 3 + 2) * 2 + 1] == 7.0);
  img.data[(0 * 3 + 1) * 2 + 0] = -3.0;
  CHECK(img.at(0, 1, 0) == -3.0);
}

TEST_CASE("constant factory fills every entry") {
  const ImageTensor img = ImageTensor::constant(4, 5, 3, 0.25);
  CHECK(img.size() == 60);
  for (double v : img.data) CHECK(v == 0.25);
}

TEST_CASE("invalid dimensions are rejected") {
  CHECK_THROWS_AS(ImageTensor(0, 4, 3), std::invalid_argument);
  CHECK_THROWS_AS(ImageTensor(4, -1, 3), std::invalid_argument);
  CHECK_THROWS_AS(ImageTensor(4, 4, 0), std::invalid_argument);
}

TEST_CASE("shape comparison and enforcement") {
  const ImageTensor a(2, 2, 3);
  const ImageTensor b(2, 2, 3);
  const ImageTensor c(2, 3, 2);
  CHECK(a.same_shape(b));
  CHECK_FALSE(a.same_shape(c));
  CHECK_NOTHROW(dualcycle::require_same_shape(a, b, "pair"));
  CHECK_THROWS_AS(dualcycle::require_same_shape(a, c, "pair"), std::invalid_argument);
}

TEST_CASE("max_abs_diff and mean_squared_error") {
  ImageTensor a = ImageTensor::constant(1, 4, 1, 0.0);
  ImageTensor b = a;
  b.data = {0.5, -1.0, 0.25, 0.0};
  CHECK(dualcycle::max_abs_diff(a, b) == doctest::Approx(1.0).epsilon(1e-15));
  // (0.25 + 1 + 0.0625 + 0) / 4
  CHECK(dualcycle::mean_squared_error(a, b) == doctest::Approx(0.328125).epsilon(1e-15));
  CHECK(dualcycle::max_abs_diff(a, a) == 0.0);
  CHECK(dualcycle::mean_squared_error(a, a) == 0.0);
}

TEST_CASE("bitwise_equal distinguishes representations, not just values") {
  ImageTensor a = ImageTensor::constant(1, 2, 1, 0.0);
  ImageTensor b = a;
  CHECK(dualcycle::bitwise_equal(a, b));
  b.data[1] = -0.0;  // equal as doubles, different bit pattern
  CHECK(b.data[1] == 0.0);
  CHECK_FALSE(dualcycle::bitwise_equal(a, b));
  const ImageTensor c(2, 1, 1);
  CHECK_FALSE(dualcycle::bitwise_equal(a, c));
}
