// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Grayscale PGM images (P2 and P5), normalized to [0, 1].

#ifndef FHEADAPT_IMAGE_HPP_
#define FHEADAPT_IMAGE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fheadapt {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // row-major

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(std::size_t(w) * h, fill) {}

  double& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }
  double at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
};

// Throws ParseError with the byte offset of the first malformed token.
Image parse_pgm(std::span<const std::uint8_t> bytes);
Image read_pgm(const std::string& path);
// Binary P5 with the given maxval; pixels are clamped to [0, 1].
std::vector<std::uint8_t> encode_pgm(const Image& img, int maxval = 255);
void write_pgm(const std::string& path, const Image& img, int maxval = 255);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file(const std::string& path, const std::string& text);

}  // namespace fheadapt

#endif  // FHEADAPT_IMAGE_HPP_
