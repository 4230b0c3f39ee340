// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "fheadapt/errors.hpp"

namespace fheadapt {

namespace {

class PgmScanner {
 public:
  explicit PgmScanner(std::span<const std::uint8_t> b) : b_(b) {}

  std::size_t pos() const { return pos_; }

  void skip_separators() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n' && b_[pos_] != '\r') ++pos_;
      } else if (is_space(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* what, long max) {
    skip_separators();
    const std::size_t start = pos_;
    if (pos_ >= b_.size()) throw ParseError(std::string("missing ") + what, start);
    long v = 0;
    while (pos_ < b_.size() && b_[pos_] >= '0' && b_[pos_] <= '9') {
      v = v * 10 + (b_[pos_] - '0');
      if (v > max) throw ParseError(std::string(what) + " out of range", start);
      ++pos_;
    }
    if (pos_ == start || (pos_ < b_.size() && !is_space(b_[pos_]) && b_[pos_] != '#')) {
      throw ParseError(std::string("malformed ") + what, start);
    }
    return v;
  }

  // Exactly one whitespace byte separates the header from binary data.
  void single_space() {
    if (pos_ >= b_.size() || !is_space(b_[pos_])) {
      throw ParseError("expected whitespace before raster", pos_);
    }
    ++pos_;
  }

  std::uint8_t byte() {
    if (pos_ >= b_.size()) throw ParseError("truncated raster", pos_);
    return b_[pos_++];
  }

 private:
  static bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }

  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

Image parse_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw ParseError("bad PGM magic, expected P2 or P5", 0);
  }
  const bool binary = bytes[1] == '5';
  PgmScanner scan(bytes);
  for (int i = 0; i < 2; ++i) scan.byte();
  const long width = scan.number("width", 1 << 16);
  const long height = scan.number("height", 1 << 16);
  const long maxval = scan.number("maxval", 65535);
  if (width < 1 || height < 1) throw ParseError("image dimensions must be positive", 2);
  if (maxval < 1) throw ParseError("maxval must be in 1..65535", scan.pos());
  Image img(static_cast<int>(width), static_cast<int>(height));
  const double denom = static_cast<double>(maxval);
  if (binary) {
    scan.single_space();
    for (double& p : img.pixels) {
      const std::size_t at = scan.pos();
      long v = scan.byte();
      if (maxval > 255) v = (v << 8) | scan.byte();
      if (v > maxval) throw ParseError("sample exceeds maxval", at);
      p = static_cast<double>(v) / denom;
    }
  } else {
    for (double& p : img.pixels) {
      p = static_cast<double>(scan.number("sample", maxval)) / denom;
    }
  }
  return img;
}

Image read_pgm(const std::string& path) { return parse_pgm(read_file(path)); }

std::vector<std::uint8_t> encode_pgm(const Image& img, int maxval) {
  if (maxval < 1 || maxval > 65535) throw InvalidArgument("maxval must be in 1..65535");
  const std::string header = "P5\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n" + std::to_string(maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (double p : img.pixels) {
    const long v = std::lround(std::clamp(p, 0.0, 1.0) * maxval);
    if (maxval > 255) out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  return out;
}

void write_pgm(const std::string& path, const Image& img, int maxval) {
  write_file(path, encode_pgm(img, maxval));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_file(const std::string& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(
                       reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace fheadapt
