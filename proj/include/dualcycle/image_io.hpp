#pragma once

#include <string>

#include "dualcycle/image.hpp"
#include "dualcycle/maskgen.hpp"

namespace dualcycle {

// Byte mapping between the [-1, 1] value range and 8-bit storage:
//   byte  = clamp(floor((v + 1) / 2 * 255 + 0.5), 0, 255)
//   value = byte / 255 * 2 - 1
// Writers produce identical bytes for identical inputs (no timestamps or
// varying metadata), so output files can be compared byte for byte.

// PNG, 8-bit; channels must be 1 (gray) or 3 (RGB).
void write_png(const ImageTensor& img, const std::string& path);

// Reads 8-bit PNGs; palette and sub-8-bit images are expanded, 16-bit depth
// is reduced, alpha is dropped. Result has 1 or 3 channels.
ImageTensor read_png(const std::string& path);

// Binary PPM (P6), 3 channels only.
void write_ppm(const ImageTensor& img, const std::string& path);
ImageTensor read_ppm(const std::string& path);

// Binary PGM (P5): mask value 1 is stored as 255, 0 as 0. Reading maps
// bytes >= 128 back to 1.
void write_pgm(const EditMask& mask, const std::string& path);
EditMask read_pgm(const std::string& path);

}  // namespace dualcycle
