// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Keypoint sets, their text format and set comparison.
//
// Format: one keypoint per line,
//   x y octave scale orientation d0 ... d127
// with x, y in input-image pixels (subpixel refined), orientation as a bin
// index. Lines starting with '#' are comments, except
//   # ambiguous x y octave scale reason
// which records a candidate whose outcome sits within tolerance of a
// comparison boundary.

#ifndef FHEADAPT_KEYPOINTS_HPP_
#define FHEADAPT_KEYPOINTS_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace fheadapt {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  int octave = 0;
  int scale = 0;
  int orientation = 0;
  std::vector<double> descriptor;
};

struct AmbiguousKeypoint {
  double x = 0.0;
  double y = 0.0;
  int octave = 0;
  int scale = 0;
  std::string reason;
};

struct KeypointSet {
  std::vector<Keypoint> keypoints;
  std::vector<AmbiguousKeypoint> ambiguous;

  // Row-major by position, then octave and scale.
  void sort();
};

std::string format_keypoints(const KeypointSet& set);
// Throws ParseError with the byte offset of the offending line.
KeypointSet parse_keypoints(const std::string& text);

struct DiffOptions {
  double position_tolerance = 1e-4;    // input-image pixels
  double descriptor_tolerance = 1e-6;  // per normalized entry
};

struct DiffSummary {
  std::size_t matched = 0;
  std::size_t missing = 0;   // in reference only
  std::size_t spurious = 0;  // in candidate only
  std::size_t excluded = 0;  // matched an ambiguous reference entry
  std::size_t orientation_agree = 0;
  std::size_t descriptor_agree = 0;
  double max_descriptor_delta = 0.0;

  bool identical() const { return missing == 0 && spurious == 0 && orientation_agree == matched; }
  double orientation_agreement() const {
    return matched == 0 ? 1.0 : static_cast<double>(orientation_agree) / static_cast<double>(matched);
  }
};

// Matches keypoints of the same octave and scale whose positions agree within
// tolerance. Candidate keypoints that coincide with an ambiguous entry of
// either set are excluded rather than counted as spurious, and ambiguous
// entries never count as missing.
DiffSummary diff_keypoints(const KeypointSet& reference, const KeypointSet& candidate,
                           const DiffOptions& opts = {});
std::string format_diff(const DiffSummary& d);

}  // namespace fheadapt

#endif  // FHEADAPT_KEYPOINTS_HPP_
