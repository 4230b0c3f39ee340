// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Run configuration. The text format is one `key = value` per line; `#`
// starts a comment. Unknown keys are errors.

#ifndef FHEADAPT_CONFIG_HPP_
#define FHEADAPT_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "fheadapt/protocol.hpp"
#include "fheadapt/sim.hpp"

namespace fheadapt {

enum class Mode { Plaintext, Interactive, Deferred };

const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);  // throws InvalidArgument

enum class OrientationWeighting { Squared, Sqrt };

struct PipelineConfig {
  int octaves = 3;
  int scales_per_octave = 3;
  double base_sigma = 1.6;
  int orientation_bins = 36;
  // Descriptor grid: cells per side (4x4) and angle bins per cell.
  int descriptor_cells = 4;
  int descriptor_bins = 8;
  double contrast_threshold = 0.03;
  double edge_threshold = 10.0;
  OrientationWeighting orientation_weighting = OrientationWeighting::Squared;
  // Half-width of the square orientation window, in pixels.
  int orientation_radius = 3;
  // Pixels excluded at every image border of every octave.
  int border = 9;

  void validate() const;
};

struct RunConfig {
  sim::SimParams sim;
  PipelineConfig pipeline;
  protocol::PaddingPolicy padding;
  Mode mode = Mode::Deferred;
  std::uint64_t seed = 1;

  void validate() const;
};

// Throws ParseError (byte offset of the offending line) for syntax errors
// and unknown keys, InvalidArgument for out-of-range values.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
// Round-trips through parse_config.
std::string format_config(const RunConfig& cfg);

}  // namespace fheadapt

#endif  // FHEADAPT_CONFIG_HPP_
