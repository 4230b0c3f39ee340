// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/keypoints.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "fheadapt/errors.hpp"

namespace fheadapt {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

template <class K>
auto position_key(const K& k) {
  return std::make_tuple(k.y, k.x, k.octave, k.scale);
}

}  // namespace

void KeypointSet::sort() {
  std::stable_sort(keypoints.begin(), keypoints.end(), [](const auto& a, const auto& b) {
    return position_key(a) < position_key(b);
  });
  std::stable_sort(ambiguous.begin(), ambiguous.end(), [](const auto& a, const auto& b) {
    return position_key(a) < position_key(b);
  });
}

std::string format_keypoints(const KeypointSet& set) {
  std::string out = "# x y octave scale orientation descriptor...\n";
  for (const Keypoint& k : set.keypoints) {
    out += fmt(k.x) + " " + fmt(k.y) + " " + std::to_string(k.octave) + " " +
           std::to_string(k.scale) + " " + std::to_string(k.orientation);
    for (double d : k.descriptor) out += " " + fmt(d);
    out += "\n";
  }
  for (const AmbiguousKeypoint& a : set.ambiguous) {
    out += "# ambiguous " + fmt(a.x) + " " + fmt(a.y) + " " + std::to_string(a.octave) + " " +
           std::to_string(a.scale) + " " + a.reason + "\n";
  }
  return out;
}

KeypointSet parse_keypoints(const std::string& text) {
  KeypointSet set;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    std::istringstream in(line);
    if (line.rfind("# ambiguous ", 0) == 0) {
      std::string hash, word;
      AmbiguousKeypoint a;
      if (!(in >> hash >> word >> a.x >> a.y >> a.octave >> a.scale)) {
        throw ParseError("malformed ambiguous entry", start);
      }
      std::getline(in >> std::ws, a.reason);
      set.ambiguous.push_back(std::move(a));
    } else if (!line.empty() && line[0] != '#') {
      Keypoint k;
      if (!(in >> k.x >> k.y >> k.octave >> k.scale >> k.orientation)) {
        throw ParseError("malformed keypoint line", start);
      }
      double d;
      while (in >> d) k.descriptor.push_back(d);
      if (!in.eof()) throw ParseError("malformed descriptor value", start);
      set.keypoints.push_back(std::move(k));
    }
    start = end + 1;
  }
  return set;
}

DiffSummary diff_keypoints(const KeypointSet& reference, const KeypointSet& candidate,
                           const DiffOptions& opts) {
  auto near = [&](const auto& a, const auto& b) {
    return a.octave == b.octave && a.scale == b.scale &&
           std::abs(a.x - b.x) <= opts.position_tolerance &&
           std::abs(a.y - b.y) <= opts.position_tolerance;
  };
  auto is_ambiguous = [&](const Keypoint& k) {
    const auto hit = [&](const AmbiguousKeypoint& a) { return near(a, k); };
    return std::any_of(reference.ambiguous.begin(), reference.ambiguous.end(), hit) ||
           std::any_of(candidate.ambiguous.begin(), candidate.ambiguous.end(), hit);
  };

  DiffSummary d;
  std::vector<bool> used(candidate.keypoints.size(), false);
  for (const Keypoint& r : reference.keypoints) {
    std::size_t best = candidate.keypoints.size();
    double best_dist = 0.0;
    for (std::size_t i = 0; i < candidate.keypoints.size(); ++i) {
      if (used[i] || !near(r, candidate.keypoints[i])) continue;
      const double dist = std::hypot(r.x - candidate.keypoints[i].x, r.y - candidate.keypoints[i].y);
      if (best == candidate.keypoints.size() || dist < best_dist) {
        best = i;
        best_dist = dist;
      }
    }
    if (best == candidate.keypoints.size()) {
      if (is_ambiguous(r)) {
        ++d.excluded;
      } else {
        ++d.missing;
      }
      continue;
    }
    used[best] = true;
    const Keypoint& c = candidate.keypoints[best];
    ++d.matched;
    if (r.orientation == c.orientation) ++d.orientation_agree;
    double delta = r.descriptor.size() == c.descriptor.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < r.descriptor.size() && i < c.descriptor.size(); ++i) {
      delta = std::max(delta, std::abs(r.descriptor[i] - c.descriptor[i]));
    }
    d.max_descriptor_delta = std::max(d.max_descriptor_delta, delta);
    if (delta <= opts.descriptor_tolerance) ++d.descriptor_agree;
  }
  for (std::size_t i = 0; i < candidate.keypoints.size(); ++i) {
    if (used[i]) continue;
    if (is_ambiguous(candidate.keypoints[i])) {
      ++d.excluded;
    } else {
      ++d.spurious;
    }
  }
  return d;
}

std::string format_diff(const DiffSummary& d) {
  std::ostringstream out;
  out << "matched = " << d.matched << "\n"
      << "missing = " << d.missing << "\n"
      << "spurious = " << d.spurious << "\n"
      << "excluded = " << d.excluded << "\n"
      << "orientation_agree = " << d.orientation_agree << "\n"
      << "orientation_agreement = " << fmt(d.orientation_agreement()) << "\n"
      << "descriptor_agree = " << d.descriptor_agree << "\n"
      << "max_descriptor_delta = " << fmt(d.max_descriptor_delta) << "\n";
  return out.str();
}

}  // namespace fheadapt
