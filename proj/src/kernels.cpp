// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fheadapt::kernels {

using deferred::compare;
using deferred::greater_equal;
using deferred::select;

Expr max2(Expr a, Expr b) { return select(compare(a, b), a, b); }

Expr running_max(std::span<const Expr> ls) {
  if (ls.empty()) throw EmptyInput("running_max of an empty list");
  Expr best = ls[0].graph()->plain(0.0);
  for (const Expr& x : ls) best = select(compare(x, best), x, best);
  return best;
}

Expr vec_max(std::span<const Expr> ls) {
  if (ls.empty()) throw EmptyInput("vec_max of an empty list");
  if (ls.size() == 1) return ls[0];
  const std::size_t half = ls.size() / 2;
  return max2(vec_max(ls.first(half)), vec_max(ls.subspan(half)));
}

namespace {

// Tournament over ls[lo, hi): fills decisions in post-order and returns the
// winning value.
Expr tournament(std::span<const Expr> ls, std::size_t lo, std::size_t hi,
                std::vector<Expr>& take_left) {
  if (hi - lo == 1) return ls[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  const Expr left = tournament(ls, lo, mid, take_left);
  const Expr right = tournament(ls, mid, hi, take_left);
  const Expr c = greater_equal(left, right);
  take_left.push_back(c);
  return select(c, left, right);
}

// Masks are built from the root down, so every subtree's prefix product is
// a single shared node.
void spread(std::size_t lo, std::size_t hi, Expr prefix, const std::vector<Expr>& take_left,
            std::size_t& next, std::vector<Expr>& mask) {
  if (hi - lo == 1) {
    mask[lo] = prefix;
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  // Post-order numbering: the node's own decision comes after both subtrees.
  const std::size_t right_size = hi - mid;
  const std::size_t left_size = mid - lo;
  const std::size_t self = next + (left_size - 1) + (right_size - 1);
  const Expr c = take_left[self];
  std::size_t left_next = next;
  spread(lo, mid, prefix * c, take_left, left_next, mask);
  std::size_t right_next = next + (left_size - 1);
  spread(mid, hi, prefix * (1.0 - c), take_left, right_next, mask);
  next = self + 1;
}

}  // namespace

ArgMax vec_argmax_onehot(std::span<const Expr> ls) {
  if (ls.empty()) throw EmptyInput("vec_argmax_onehot of an empty list");
  Graph& g = *ls[0].graph();
  std::vector<Expr> take_left;
  take_left.reserve(ls.size());
  ArgMax out;
  out.max = tournament(ls, 0, ls.size(), take_left);
  out.onehot.mask.assign(ls.size(), Expr{});
  std::size_t next = 0;
  spread(0, ls.size(), g.plain(1.0), take_left, next, out.onehot.mask);
  return out;
}

// ---------------------------------------------------------------------------

HistogramSpec HistogramSpec::uniform(std::size_t bins) {
  if (bins < 3) throw InvalidArgument("a histogram needs at least 3 bins");
  constexpr double r = std::numbers::sqrt2 / 2.0;
  // Multiples of pi/4 get exact trig values so axis-aligned and diagonal
  // gradients land on boundaries exactly.
  static constexpr double kCos[8] = {1.0, r, 0.0, -r, -1.0, -r, 0.0, r};
  static constexpr double kSin[8] = {0.0, r, 1.0, r, 0.0, -r, -1.0, -r};
  HistogramSpec s;
  for (std::size_t i = 0; i < bins; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(bins);
    s.boundaries.push_back(a);
    if ((8 * i) % bins == 0) {
      s.cos_b.push_back(kCos[8 * i / bins]);
      s.sin_b.push_back(kSin[8 * i / bins]);
    } else {
      s.cos_b.push_back(std::cos(a));
      s.sin_b.push_back(std::sin(a));
    }
  }
  return s;
}

void HistogramSpec::validate() const {
  const std::size_t n = boundaries.size();
  if (n < 2 || cos_b.size() != n || sin_b.size() != n) {
    throw InvalidArgument("histogram spec needs at least 2 boundaries with trig pairs");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = boundaries[i];
    const double hi = i + 1 < n ? boundaries[i + 1] : boundaries[0] + 2.0 * std::numbers::pi;
    if (!(hi > lo) || hi - lo >= std::numbers::pi) {
      throw InvalidArgument("histogram bin " + std::to_string(i) +
                            " must be non-empty and narrower than pi");
    }
  }
  if (boundaries[0] < 0.0 || boundaries[n - 1] >= 2.0 * std::numbers::pi) {
    throw InvalidArgument("histogram boundaries must lie in [0, 2pi)");
  }
}

std::vector<Expr> boundary_tests(Expr dx, Expr dy, const HistogramSpec& spec) {
  std::vector<Expr> c;
  c.reserve(spec.num_bins());
  Graph& g = *dx.graph();
  for (std::size_t k = 0; k < spec.num_bins(); ++k) {
    const Expr side = spec.cos_b[k] * dy - spec.sin_b[k] * dx;
    c.push_back(greater_equal(side, g.plain(0.0)));
  }
  return c;
}

std::vector<Expr> bin_masks(Expr dx, Expr dy, const HistogramSpec& spec) {
  const std::vector<Expr> c = boundary_tests(dx, dy, spec);
  const std::size_t n = c.size();
  std::vector<Expr> masks;
  masks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) masks.push_back(c[i] * (1.0 - c[(i + 1) % n]));
  return masks;
}

Expr bin_mask(const Gradient& g, const HistogramSpec& spec, std::size_t i) {
  const std::size_t n = spec.num_bins();
  if (i >= n) throw InvalidArgument("bin index out of range");
  Graph& graph = *g.dx.graph();
  auto test = [&](std::size_t k) {
    return greater_equal(spec.cos_b[k] * g.dy - spec.sin_b[k] * g.dx, graph.plain(0.0));
  };
  return test(i) * (1.0 - test((i + 1) % n));
}

Expr bin_mask_tan(const Gradient& g, const HistogramSpec& spec, std::size_t i) {
  const std::size_t n = spec.num_bins();
  if (i >= n) throw InvalidArgument("bin index out of range");
  constexpr double kPi = std::numbers::pi;
  constexpr double kTol = 1e-12;
  Graph& graph = *g.dx.graph();
  const double lo = spec.boundaries[i];
  const double hi = i + 1 < n ? spec.boundaries[i + 1] : spec.boundaries[0] + 2.0 * kPi;
  const bool upper_quadrant = lo >= -kTol && hi <= kPi / 2 + kTol;
  const bool lower_quadrant = lo >= 1.5 * kPi - kTol && hi <= 2.0 * kPi + kTol;
  if (!upper_quadrant && !lower_quadrant) return graph.plain(0.0);
  // tan(lo)*dx <= dy, vacuous at -pi/2.
  Expr above_lo = std::abs(lo - 1.5 * kPi) <= kTol
                      ? graph.plain(1.0)
                      : greater_equal(g.dy, std::tan(lo) * g.dx);
  // dy < tan(hi)*dx, vacuous at pi/2.
  Expr below_hi = std::abs(hi - kPi / 2) <= kTol
                      ? graph.plain(1.0)
                      : 1.0 - greater_equal(g.dy, std::tan(hi) * g.dx);
  return above_lo * below_hi;
}

std::vector<Expr> weighted_histogram(Graph& g, std::span<const Gradient> grads,
                                     const HistogramSpec& spec) {
  const std::size_t n = spec.num_bins();
  std::vector<std::vector<Expr>> contrib(n);
  for (const Gradient& grad : grads) {
    const std::vector<Expr> masks = bin_masks(grad.dx, grad.dy, spec);
    for (std::size_t j = 0; j < n; ++j) contrib[j].push_back(masks[j] * grad.weight);
  }
  std::vector<Expr> bins;
  bins.reserve(n);
  for (std::size_t j = 0; j < n; ++j) bins.push_back(deferred::sum(g, contrib[j]));
  return bins;
}

// ---------------------------------------------------------------------------

Grid<Expr> convolve2d(const Grid<Expr>& img, const Kernel2d& kernel) {
  if (kernel.width % 2 == 0 || kernel.height % 2 == 0) {
    throw InvalidArgument("kernel dimensions must be odd");
  }
  if (img.data.empty()) return img;
  Graph& g = *img.data[0].graph();
  const int rx = kernel.width / 2;
  const int ry = kernel.height / 2;
  Grid<Expr> out(img.width, img.height);
  std::vector<Expr> terms;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      terms.clear();
      for (int j = 0; j < kernel.height; ++j) {
        for (int i = 0; i < kernel.width; ++i) {
          const double k = kernel.at(i, j);
          if (k == 0.0) continue;
          terms.push_back(k * img.clamped(x + i - rx, y + j - ry));
        }
      }
      out.at(x, y) = deferred::sum(g, terms);
    }
  }
  return out;
}

namespace {

Grid<Expr> convolve_1d(const Grid<Expr>& img, std::span<const double> k, bool horizontal) {
  if (k.size() % 2 == 0) throw InvalidArgument("kernel length must be odd");
  if (img.data.empty()) return img;
  Graph& g = *img.data[0].graph();
  const int r = static_cast<int>(k.size() / 2);
  Grid<Expr> out(img.width, img.height);
  std::vector<Expr> terms;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      terms.clear();
      for (int i = -r; i <= r; ++i) {
        const double w = k[static_cast<std::size_t>(i + r)];
        if (w == 0.0) continue;
        terms.push_back(w * (horizontal ? img.clamped(x + i, y) : img.clamped(x, y + i)));
      }
      out.at(x, y) = deferred::sum(g, terms);
    }
  }
  return out;
}

}  // namespace

Grid<Expr> convolve_separable(const Grid<Expr>& img, std::span<const double> kx,
                              std::span<const double> ky) {
  return convolve_1d(convolve_1d(img, kx, true), ky, false);
}

int gaussian_radius(double sigma) {
  return std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive");
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : k) v /= total;
  return k;
}

}  // namespace fheadapt::kernels
