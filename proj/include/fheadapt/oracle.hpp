// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Plaintext reference for the SIFT-lite pipeline, written directly against
// doubles with ordinary control flow (branches, division, atan2). Decisions
// that fall within kEpsilon of a comparison boundary are reported as
// ambiguous instead of being guessed, because the encrypted pipeline
// evaluates the same quantities in a different arithmetic order.

#ifndef FHEADAPT_ORACLE_HPP_
#define FHEADAPT_ORACLE_HPP_

#include <array>
#include <vector>

#include "fheadapt/config.hpp"
#include "fheadapt/image.hpp"
#include "fheadapt/keypoints.hpp"

namespace fheadapt::oracle {

inline constexpr double kEpsilon = 1e-9;

// Kleene three-valued logic.
enum class Tri { No, Yes, Maybe };

Tri tri_and(Tri a, Tri b);
Tri tri_or(Tri a, Tri b);
Tri tri_not(Tri a);
// [a > b]. Exact equality follows the strict tie rule; a difference that is
// non-zero but within eps is Maybe.
Tri greater(double a, double b, double eps = kEpsilon);

struct Pyramid {
  std::vector<std::vector<Image>> gauss;  // [octave][level]

  double dog(int octave, int scale, int x, int y) const;
};

Pyramid build_pyramid(const Image& img, const PipelineConfig& cfg);

Tri extremum(const Pyramid& p, int octave, int scale, int x, int y, const PipelineConfig& cfg);

struct Localization {
  std::array<double, 3> offset{};  // (x, y, scale)
  Tri offsets_ok = Tri::No;
  Tri edge_ok = Tri::No;
};

Localization localize(const Pyramid& p, int octave, int scale, int x, int y,
                      const PipelineConfig& cfg);

// Histogram whose bins are only known to lie in [lo, hi].
struct IntervalHistogram {
  std::vector<double> lo;
  std::vector<double> hi;
  double total_weight = 0.0;
};

struct BinChoice {
  int bin = -1;  // -1 for a zero gradient
  bool ambiguous = false;
};

// Half-open bins [2 pi j / n, 2 pi (j + 1) / n) by atan2.
BinChoice angle_bin(double dx, double dy, int bins);

IntervalHistogram orientation_histogram(const Image& level, int x, int y, int scale,
                                        const PipelineConfig& cfg);

struct Peak {
  int bin = 0;
  bool ambiguous = false;
};

// Lowest index among the maxima.
Peak peak(const IntervalHistogram& h);

struct Descriptor {
  std::vector<double> values;  // normalized
  bool ambiguous = false;
};

Descriptor descriptor(const Image& level, int x, int y, const PipelineConfig& cfg);

KeypointSet run(const Image& img, const PipelineConfig& cfg);

}  // namespace fheadapt::oracle

#endif  // FHEADAPT_ORACLE_HPP_
