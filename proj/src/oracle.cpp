// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fheadapt/errors.hpp"
#include "fheadapt/sift.hpp"

namespace fheadapt::oracle {

Tri tri_and(Tri a, Tri b) {
  if (a == Tri::No || b == Tri::No) return Tri::No;
  if (a == Tri::Maybe || b == Tri::Maybe) return Tri::Maybe;
  return Tri::Yes;
}

Tri tri_or(Tri a, Tri b) { return tri_not(tri_and(tri_not(a), tri_not(b))); }

Tri tri_not(Tri a) {
  if (a == Tri::Maybe) return a;
  return a == Tri::Yes ? Tri::No : Tri::Yes;
}

Tri greater(double a, double b, double eps) {
  const double d = a - b;
  if (d == 0.0) return Tri::No;
  if (std::abs(d) <= eps) return Tri::Maybe;
  return d > 0.0 ? Tri::Yes : Tri::No;
}

namespace {

std::vector<double> gaussian(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> w;
  double total = 0.0;
  for (int i = -r; i <= r; ++i) {
    w.push_back(std::exp(-(i * i) / (2.0 * sigma * sigma)));
    total += w.back();
  }
  for (double& v : w) v /= total;
  return w;
}

int clamp(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

Image blur(const Image& in, double sigma) {
  const std::vector<double> w = gaussian(sigma);
  const int r = static_cast<int>(w.size() / 2);
  Image tmp(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += w[std::size_t(i + r)] * in.at(clamp(x + i, in.width), y);
      tmp.at(x, y) = acc;
    }
  }
  Image out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += w[std::size_t(i + r)] * tmp.at(x, clamp(y + i, in.height));
      out.at(x, y) = acc;
    }
  }
  return out;
}

double sigma_of(const PipelineConfig& cfg, int level) {
  return cfg.base_sigma * std::pow(2.0, static_cast<double>(level) / cfg.scales_per_octave);
}

// cos/sin of boundary k out of n; exact at multiples of pi/4.
void boundary(int k, int n, double& c, double& s, bool& exact) {
  constexpr double r = std::numbers::sqrt2 / 2.0;
  static constexpr double kCos[8] = {1.0, r, 0.0, -r, -1.0, -r, 0.0, r};
  static constexpr double kSin[8] = {0.0, r, 1.0, r, 0.0, -r, -1.0, -r};
  exact = (8 * k) % n == 0;
  if (exact) {
    c = kCos[8 * k / n];
    s = kSin[8 * k / n];
  } else {
    const double a = 2.0 * std::numbers::pi * k / n;
    c = std::cos(a);
    s = std::sin(a);
  }
}

struct Gradient {
  double dx = 0.0;
  double dy = 0.0;
  double m2() const { return dx * dx + dy * dy; }
};

Gradient gradient(const Image& l, int x, int y) {
  return {l.at(x + 1, y) - l.at(x - 1, y), l.at(x, y + 1) - l.at(x, y - 1)};
}

}  // namespace

double Pyramid::dog(int octave, int scale, int x, int y) const {
  const auto& o = gauss[std::size_t(octave)];
  return o[std::size_t(scale + 1)].at(x, y) - o[std::size_t(scale)].at(x, y);
}

Pyramid build_pyramid(const Image& img, const PipelineConfig& cfg) {
  Pyramid p;
  const int levels = cfg.scales_per_octave + 3;
  for (int o = 0; o < cfg.octaves; ++o) {
    std::vector<Image> octave;
    if (o == 0) {
      for (int k = 0; k < levels; ++k) octave.push_back(blur(img, sigma_of(cfg, k)));
    } else {
      const Image& parent = p.gauss.back()[std::size_t(cfg.scales_per_octave)];
      Image base((parent.width + 1) / 2, (parent.height + 1) / 2);
      for (int y = 0; y < base.height; ++y) {
        for (int x = 0; x < base.width; ++x) base.at(x, y) = parent.at(2 * x, 2 * y);
      }
      octave.push_back(base);
      for (int k = 1; k < levels; ++k) {
        // Level k needs total blur sigma_k; the base already carries sigma_0.
        const double s0 = sigma_of(cfg, 0);
        const double sk = sigma_of(cfg, k);
        octave.push_back(blur(base, std::sqrt(sk * sk - s0 * s0)));
      }
    }
    p.gauss.push_back(std::move(octave));
  }
  return p;
}

Tri extremum(const Pyramid& p, int octave, int scale, int x, int y, const PipelineConfig& cfg) {
  const double v = p.dog(octave, scale, x, y);
  Tri is_max = Tri::Yes;
  Tri is_min = Tri::Yes;
  for (int ds = -1; ds <= 1; ++ds) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (ds == 0 && dy == 0 && dx == 0) continue;
        const double n = p.dog(octave, scale + ds, x + dx, y + dy);
        is_max = tri_and(is_max, greater(v, n));
        is_min = tri_and(is_min, greater(n, v));
      }
    }
  }
  const Tri contrast = tri_or(greater(v, cfg.contrast_threshold), greater(-v, cfg.contrast_threshold));
  return tri_and(tri_or(is_max, is_min), contrast);
}

Localization localize(const Pyramid& p, int octave, int scale, int x, int y,
                      const PipelineConfig& cfg) {
  auto d = [&](int ds, int dx, int dy) { return p.dog(octave, scale + ds, x + dx, y + dy); };
  const double c = d(0, 0, 0);
  const double g[3] = {(d(0, 1, 0) - d(0, -1, 0)) / 2.0, (d(0, 0, 1) - d(0, 0, -1)) / 2.0,
                       (d(1, 0, 0) - d(-1, 0, 0)) / 2.0};
  const double dxx = d(0, 1, 0) - 2.0 * c + d(0, -1, 0);
  const double dyy = d(0, 0, 1) - 2.0 * c + d(0, 0, -1);
  const double dss = d(1, 0, 0) - 2.0 * c + d(-1, 0, 0);
  const double dxy = (d(0, 1, 1) - d(0, 1, -1) - d(0, -1, 1) + d(0, -1, -1)) / 4.0;
  const double dxs = (d(1, 1, 0) - d(-1, 1, 0) - d(1, -1, 0) + d(-1, -1, 0)) / 4.0;
  const double dys = (d(1, 0, 1) - d(-1, 0, 1) - d(1, 0, -1) + d(-1, 0, -1)) / 4.0;

  // Solve H * offset = -g by Gaussian elimination with partial pivoting.
  double a[3][4] = {{dxx, dxy, dxs, -g[0]}, {dxy, dyy, dys, -g[1]}, {dxs, dys, dss, -g[2]}};
  double scale_h = 0.0;
  for (auto& row : a) {
    for (int j = 0; j < 3; ++j) scale_h = std::max(scale_h, std::abs(row[j]));
  }
  Localization out;
  bool singular = scale_h == 0.0;
  for (int col = 0; col < 3 && !singular; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) <= 1e-12 * scale_h) {
      singular = true;
      break;
    }
    std::swap(a[col], a[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int j = col; j < 4; ++j) a[r][j] -= f * a[col][j];
    }
  }
  if (singular) {
    out.offsets_ok = Tri::Maybe;
  } else {
    out.offsets_ok = Tri::Yes;
    for (int i = 0; i < 3; ++i) {
      out.offset[std::size_t(i)] = a[i][3] / a[i][i];
      const double slack = 0.5 - std::abs(out.offset[std::size_t(i)]);
      Tri ok = slack == 0.0 ? Tri::Yes : greater(slack, 0.0);
      out.offsets_ok = tri_and(out.offsets_ok, ok);
    }
  }

  const double tr = dxx + dyy;
  const double det = dxx * dyy - dxy * dxy;
  const double lhs = tr * tr;
  const double rhs = cfg.edge_threshold * det;
  out.edge_ok = tri_not(greater(lhs, rhs, kEpsilon * std::max(std::abs(lhs), std::abs(rhs))));
  return out;
}

BinChoice angle_bin(double dx, double dy, int bins) {
  if (dx == 0.0 && dy == 0.0) return {};
  double theta = std::atan2(dy, dx);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  const double width = 2.0 * std::numbers::pi / bins;
  const int k = static_cast<int>(std::llround(theta / width)) % bins;
  double c, s;
  bool exact;
  boundary(k, bins, c, s, exact);
  // Signed distance from boundary k, scaled by the gradient magnitude.
  const double margin = c * dy - s * dx;
  BinChoice out;
  out.bin = margin >= 0.0 ? k : (k + bins - 1) % bins;
  out.ambiguous = std::abs(margin) <= kEpsilon && !(margin == 0.0 && exact);
  return out;
}

IntervalHistogram orientation_histogram(const Image& level, int x, int y, int scale,
                                        const PipelineConfig& cfg) {
  const int n = cfg.orientation_bins;
  const int r = cfg.orientation_radius;
  const double sw = 1.5 * sigma_of(cfg, scale);
  IntervalHistogram h;
  h.lo.assign(std::size_t(n), 0.0);
  h.hi.assign(std::size_t(n), 0.0);
  for (int k = -r; k <= r; ++k) {
    for (int i = -r; i <= r; ++i) {
      const Gradient gr = gradient(level, x + i, y + k);
      const double mag = cfg.orientation_weighting == OrientationWeighting::Sqrt
                             ? std::sqrt(gr.m2())
                             : gr.m2();
      const double w = std::exp(-(i * i) / (2.0 * sw * sw)) * std::exp(-(k * k) / (2.0 * sw * sw)) * mag;
      h.total_weight += w;
      const BinChoice b = angle_bin(gr.dx, gr.dy, n);
      if (b.bin < 0) continue;
      if (b.ambiguous) {
        for (int off = -1; off <= 1; ++off) h.hi[std::size_t((b.bin + off + n) % n)] += w;
      } else {
        h.lo[std::size_t(b.bin)] += w;
        h.hi[std::size_t(b.bin)] += w;
      }
    }
  }
  return h;
}

Peak peak(const IntervalHistogram& h) {
  const std::size_t n = h.lo.size();
  Peak p;
  double best = -1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double mid = 0.5 * (h.lo[j] + h.hi[j]);
    if (mid > best) {
      best = mid;
      p.bin = static_cast<int>(j);
    }
  }
  const double eps = kEpsilon * h.total_weight;
  for (std::size_t j = 0; j < n; ++j) {
    if (static_cast<int>(j) == p.bin) continue;
    if (h.hi[j] >= h.lo[std::size_t(p.bin)] - eps) p.ambiguous = true;
  }
  return p;
}

Descriptor descriptor(const Image& level, int x, int y, const PipelineConfig& cfg) {
  const int cells = cfg.descriptor_cells;
  const int bins = cfg.descriptor_bins;
  const int cell = sift::kCellSize;
  const int half = cells * cell / 2;
  Descriptor d;
  d.values.assign(std::size_t(cells * cells * bins), 0.0);
  for (int py = y - half; py < y + half; ++py) {
    for (int px = x - half; px < x + half; ++px) {
      const Gradient gr = gradient(level, px, py);
      const BinChoice b = angle_bin(gr.dx, gr.dy, bins);
      if (b.bin < 0) continue;
      d.ambiguous = d.ambiguous || b.ambiguous;
      const int ci = (px - (x - half)) / cell;
      const int cj = (py - (y - half)) / cell;
      d.values[std::size_t((cj * cells + ci) * bins + b.bin)] += gr.m2();
    }
  }
  double norm = 0.0;
  for (double v : d.values) norm += v * v;
  norm = std::sqrt(norm);
  for (double& v : d.values) v = norm >= sift::kNormEpsilon ? v / norm : 0.0;
  return d;
}

KeypointSet run(const Image& img, const PipelineConfig& cfg) {
  const sift::Layout layout = sift::Layout::make(img.width, img.height, cfg);
  const Pyramid p = build_pyramid(img, cfg);
  KeypointSet set;
  for (const sift::Candidate& c : layout.candidates) {
    const Tri ext = extremum(p, c.octave, c.scale, c.x, c.y, cfg);
    if (ext == Tri::No) continue;
    const Localization loc = localize(p, c.octave, c.scale, c.x, c.y, cfg);
    const Tri status = tri_and(ext, tri_and(loc.offsets_ok, loc.edge_ok));
    if (status == Tri::No) continue;
    const double step = std::ldexp(1.0, c.octave);
    const double kx = (c.x + loc.offset[0]) * step;
    const double ky = (c.y + loc.offset[1]) * step;
    if (status == Tri::Maybe) {
      set.ambiguous.push_back({kx, ky, c.octave, c.scale, "decision"});
      continue;
    }
    const Image& level = p.gauss[std::size_t(c.octave)][std::size_t(c.scale)];
    const Peak pk = peak(orientation_histogram(level, c.x, c.y, c.scale, cfg));
    if (pk.ambiguous) {
      set.ambiguous.push_back({kx, ky, c.octave, c.scale, "orientation"});
      continue;
    }
    Keypoint k;
    k.x = kx;
    k.y = ky;
    k.octave = c.octave;
    k.scale = c.scale;
    k.orientation = pk.bin;
    k.descriptor = descriptor(level, c.x, c.y, cfg).values;
    set.keypoints.push_back(std::move(k));
  }
  set.sort();
  return set;
}

}  // namespace fheadapt::oracle
