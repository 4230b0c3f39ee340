// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// SIFT-lite on encrypted pixels: Gaussian/DoG pyramid, dense extremum masks,
// one-pass subpixel localization with rational offsets, orientation by
// weighted histogram and one-hot argmax, 4x4x8 descriptor with deferred
// normalization.
//
// Simplifications (the plaintext oracle makes the same ones): a single
// localization pass, nearest-cell descriptor binning, no rotation of the
// descriptor window, one orientation per keypoint, squared-magnitude
// weights by default.

#ifndef FHEADAPT_SIFT_HPP_
#define FHEADAPT_SIFT_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fheadapt/config.hpp"
#include "fheadapt/graph.hpp"
#include "fheadapt/image.hpp"
#include "fheadapt/kernels.hpp"
#include "fheadapt/keypoints.hpp"
#include "fheadapt/protocol.hpp"

namespace fheadapt::sift {

using deferred::Expr;
using deferred::Rational;

inline constexpr int kCellSize = 4;  // descriptor cell side, pixels
inline constexpr double kNormEpsilon = 1e-12;

struct Candidate {
  int octave = 0;
  int scale = 0;  // 1..scales_per_octave
  int x = 0;      // octave sample coordinates
  int y = 0;
};

struct OctaveShape {
  int width = 0;
  int height = 0;
};

// Everything about a run that depends only on image size and config.
struct Layout {
  int width = 0;
  int height = 0;
  std::vector<OctaveShape> octaves;
  // Ordered by (octave, scale, y, x).
  std::vector<Candidate> candidates;

  static Layout make(int width, int height, const PipelineConfig& cfg);
};

// Blur applied to produce Gaussian level k of an octave: from the input
// image for octave 0, from level 0 (the decimated parent) otherwise. Zero
// means "copy".
double level_sigma(const PipelineConfig& cfg, int octave, int level);
// Absolute blur of level k, in octave pixels.
double scale_sigma(const PipelineConfig& cfg, int level);
// Window weight exp(-i^2 / (2 s^2)) with s = 1.5 * scale_sigma.
std::vector<double> orientation_weights(const PipelineConfig& cfg, int level);

// DoG sample at (scale + ds, x + dx, y + dy) around a candidate.
using Neighborhood = std::function<Expr(int ds, int dx, int dy)>;

// (all 26 [v - n > 0] or all 26 [n - v > 0]) and |v| > contrast_threshold.
Expr extremum_mask(const Neighborhood& n, const PipelineConfig& cfg);

struct Localization {
  std::array<Rational, 3> offset;  // (x, y, scale)
  Expr offsets_ok;                 // every |offset| <= 0.5
  Expr edge_ok;                    // tr^2 <= r * det on the spatial Hessian
  Expr keep;                       // offsets_ok * edge_ok
};

Localization localize(const Neighborhood& n, const PipelineConfig& cfg);

// Gradient by central differences at (x, y) of a grid.
kernels::Gradient central_gradient(const kernels::Grid<Expr>& level, int x, int y);

// Server program. The inputs of the session are the image pixels in
// row-major order.
protocol::Program make_program(const Layout& layout, const PipelineConfig& cfg);

struct DecodeStats {
  double max_onehot_error = 0.0;       // |sum(mask) - 1|
  double max_conservation_error = 0.0; // |sum(bins) - sum(weights)|
  std::size_t candidates = 0;
};

// Client side: turns resolved outputs into keypoints.
KeypointSet decode(const Layout& layout, const PipelineConfig& cfg,
                   const std::map<std::string, std::vector<double>>& outputs,
                   DecodeStats* stats = nullptr);

struct StageDepth {
  std::string stage;
  int levels_consumed = 0;
};

struct PipelineResult {
  KeypointSet keypoints;
  protocol::RoundTrace trace;
  std::vector<protocol::StageStats> stages;
  std::vector<StageDepth> depth;
  deferred::LeakageMetric leakage;
  DecodeStats checks;
  std::uint64_t server_decrypts = 0;
  std::size_t candidates = 0;
};

// Plaintext mode runs the oracle; the other modes run the two-party
// protocol. Throws DepthExhausted naming the stage.
PipelineResult run_pipeline(const Image& img, const RunConfig& cfg);

}  // namespace fheadapt::sift

#endif  // FHEADAPT_SIFT_HPP_
