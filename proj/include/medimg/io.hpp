#pragma once

#include <string>

#include "medimg/image.hpp"

namespace medimg::io {

// Format is chosen by extension: .pgm/.ppm (binary P5/P6) or .png.
GrayImage read_gray(const std::string& path);
void write_gray(const std::string& path, const GrayImage& img);

// Masks live as {0,255} 8-bit files and {0,1} in memory. Any nonzero pixel reads as 1.
BinaryMask read_mask(const std::string& path);
void write_mask(const std::string& path, const BinaryMask& mask);

ColorImage read_color(const std::string& path);
void write_color(const std::string& path, const ColorImage& img);

// 16-bit label image; labels above 65535 are rejected.
void write_labels(const std::string& path, const LabelMap& labels);

}  // namespace medimg::io
