#include "dualcycle/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

namespace dualcycle {

namespace {

uint8_t value_to_byte(double v) {
  const double scaled = std::floor((v + 1.0) / 2.0 * 255.0 + 0.5);
  return static_cast<uint8_t>(std::min(255.0, std::max(0.0, scaled)));
}

double byte_to_value(uint8_t b) { return b / 255.0 * 2.0 - 1.0; }

std::vector<uint8_t> to_bytes(const ImageTensor& img) {
  std::vector<uint8_t> bytes(img.data.size());
  for (size_t i = 0; i < img.data.size(); ++i) bytes[i] = value_to_byte(img.data[i]);
  return bytes;
}

struct FileCloser {
  void operator()(FILE* f) const { if (f) std::fclose(f); }
};
using FileHandle = std::unique_ptr<FILE, FileCloser>;

}  // namespace

void write_png(const ImageTensor& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("write_png supports 1 or 3 channels");
  if (img.height < 1 || img.width < 1) throw std::invalid_argument("write_png: empty image");

  const std::vector<uint8_t> bytes = to_bytes(img);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(bytes.data() + static_cast<size_t>(y) * img.width * img.channels);

  FileHandle fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png writer allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png writer allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageTensor read_png(const std::string& path) {
  FileHandle fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png reader allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png reader allocation failed");
  }

  // Allocated before the setjmp point so a longjmp cannot skip destructors
  // of objects created afterwards.
  std::vector<uint8_t> bytes;
  std::vector<png_bytep> rows;
  ImageTensor img;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png read failed: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  const int height = static_cast<int>(png_get_image_height(png, info));
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("unsupported png channel count in " + path);
  }

  bytes.resize(static_cast<size_t>(height) * width * channels);
  rows.resize(height);
  for (int y = 0; y < height; ++y)
    rows[y] = bytes.data() + static_cast<size_t>(y) * width * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  img = ImageTensor(height, width, channels);
  for (size_t i = 0; i < bytes.size(); ++i) img.data[i] = byte_to_value(bytes[i]);
  return img;
}

void write_ppm(const ImageTensor& img, const std::string& path) {
  if (img.channels != 3) throw std::invalid_argument("write_ppm needs 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  const std::vector<uint8_t> bytes = to_bytes(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path);
}

namespace {

// Reads one whitespace-delimited token, skipping '#' comments to end of line.
std::string next_pnm_token(std::istream& in) {
  std::string token;
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      ch = in.get();
    } else {
      break;
    }
  }
  while (ch != EOF && !std::isspace(ch)) {
    token.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  return token;
}

void read_pnm_header(std::istream& in, const std::string& magic, const std::string& path,
                     int* width, int* height) {
  if (next_pnm_token(in) != magic) throw std::runtime_error(path + " is not a " + magic + " file");
  *width = std::stoi(next_pnm_token(in));
  *height = std::stoi(next_pnm_token(in));
  const int maxval = std::stoi(next_pnm_token(in));
  if (*width < 1 || *height < 1 || maxval != 255)
    throw std::runtime_error("unsupported PNM geometry in " + path);
}

}  // namespace

ImageTensor read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  int width = 0, height = 0;
  read_pnm_header(in, "P6", path, &width, &height);
  std::vector<uint8_t> bytes(static_cast<size_t>(height) * width * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw std::runtime_error("truncated PPM data in " + path);
  ImageTensor img(height, width, 3);
  for (size_t i = 0; i < bytes.size(); ++i) img.data[i] = byte_to_value(bytes[i]);
  return img;
}

void write_pgm(const EditMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P5\n" << mask.cols << " " << mask.rows << "\n255\n";
  std::vector<uint8_t> bytes(mask.values.size());
  for (size_t i = 0; i < mask.values.size(); ++i) bytes[i] = mask.values[i] ? 255 : 0;
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path);
}

EditMask read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  int width = 0, height = 0;
  read_pnm_header(in, "P5", path, &width, &height);
  std::vector<uint8_t> bytes(static_cast<size_t>(height) * width);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw std::runtime_error("truncated PGM data in " + path);
  EditMask mask;
  mask.rows = height;
  mask.cols = width;
  mask.values.resize(bytes.size());
  for (size_t i = 0; i < bytes.size(); ++i) mask.values[i] = bytes[i] >= 128 ? 1 : 0;
  return mask;
}

}  // namespace dualcycle
