// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Branchless building blocks over graph expressions: masked max family,
// one-hot argmax, denominator-free angle binning and plaintext-kernel
// convolution. Every kernel issues the same sequence of graph operations for
// any input of a given shape.

#ifndef FHEADAPT_KERNELS_HPP_
#define FHEADAPT_KERNELS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "fheadapt/errors.hpp"
#include "fheadapt/graph.hpp"

namespace fheadapt::kernels {

using deferred::Expr;
using deferred::Graph;

template <class T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int w, int h, const T& fill = T{}) : width(w), height(h), data(std::size_t(w) * h, fill) {}

  T& at(int x, int y) { return data[std::size_t(y) * width + x]; }
  const T& at(int x, int y) const { return data[std::size_t(y) * width + x]; }
  const T& clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width ? width - 1 : x);
    y = y < 0 ? 0 : (y >= height ? height - 1 : y);
    return at(x, y);
  }
};

// select(compare(a, b), a, b)
Expr max2(Expr a, Expr b);
// Left fold of max2 seeded with 0; only meaningful for non-negative data.
Expr running_max(std::span<const Expr> ls);
// Tournament over ls[:l/2] and ls[l/2:].
Expr vec_max(std::span<const Expr> ls);

struct OneHot {
  std::vector<Expr> mask;
};

struct ArgMax {
  Expr max;
  OneHot onehot;
};

// Ties go to the lower index.
ArgMax vec_argmax_onehot(std::span<const Expr> ls);

// Half-open angular bins [a_i, a_{i+1}) covering the circle.
struct HistogramSpec {
  std::vector<double> boundaries;  // radians, strictly increasing, within 2*pi
  std::vector<double> cos_b;
  std::vector<double> sin_b;

  static HistogramSpec uniform(std::size_t bins);
  std::size_t num_bins() const { return boundaries.size(); }
  void validate() const;
};

struct Gradient {
  Expr dx;
  Expr dy;
  Expr weight;
};

// [cos(a_k)*dy - sin(a_k)*dx >= 0] for every boundary k.
std::vector<Expr> boundary_tests(Expr dx, Expr dy, const HistogramSpec& spec);
// All bin masks at once, sharing the boundary comparisons.
std::vector<Expr> bin_masks(Expr dx, Expr dy, const HistogramSpec& spec);
Expr bin_mask(const Gradient& g, const HistogramSpec& spec, std::size_t i);
// tan(a_i)*dx <= dy < tan(a_{i+1})*dx. Only valid for dx > 0; bins outside
// the right half-plane are constant 0.
Expr bin_mask_tan(const Gradient& g, const HistogramSpec& spec, std::size_t i);

std::vector<Expr> weighted_histogram(Graph& g, std::span<const Gradient> grads,
                                     const HistogramSpec& spec);

struct Kernel2d {
  int width = 0;
  int height = 0;
  std::vector<double> k;  // row-major

  double at(int x, int y) const { return k[std::size_t(y) * width + x]; }
};

// Same-size output with clamp-to-edge borders. Kernel dimensions must be odd.
Grid<Expr> convolve2d(const Grid<Expr>& img, const Kernel2d& kernel);
// Horizontal pass with kx, then vertical pass with ky.
Grid<Expr> convolve_separable(const Grid<Expr>& img, std::span<const double> kx,
                              std::span<const double> ky);

// Normalized samples of exp(-i^2 / (2 sigma^2)) for i in [-radius, radius].
std::vector<double> gaussian_kernel(double sigma, int radius);
int gaussian_radius(double sigma);

}  // namespace fheadapt::kernels

#endif  // FHEADAPT_KERNELS_HPP_
