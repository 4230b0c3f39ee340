// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>

#include "fheadapt/errors.hpp"
#include "fheadapt/image.hpp"

namespace fheadapt {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Plaintext:
      return "plaintext";
    case Mode::Interactive:
      return "interactive";
    case Mode::Deferred:
      return "deferred";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "plaintext" || s == "plaintext-oracle") return Mode::Plaintext;
  if (s == "interactive") return Mode::Interactive;
  if (s == "deferred") return Mode::Deferred;
  throw InvalidArgument("unknown mode '" + s + "' (plaintext, interactive or deferred)");
}

void PipelineConfig::validate() const {
  if (octaves < 1) throw InvalidArgument("octaves must be >= 1");
  if (scales_per_octave < 1) throw InvalidArgument("scales_per_octave must be >= 1");
  if (!(base_sigma > 0.0) || !std::isfinite(base_sigma)) {
    throw InvalidArgument("base_sigma must be positive");
  }
  // Bins must be narrower than pi for the half-plane bin test.
  if (orientation_bins < 3) throw InvalidArgument("orientation_bins must be >= 3");
  if (descriptor_cells < 1) throw InvalidArgument("descriptor cells must be >= 1");
  if (descriptor_bins < 3) throw InvalidArgument("descriptor angle bins must be >= 3");
  if (!(contrast_threshold >= 0.0)) throw InvalidArgument("contrast_threshold must be >= 0");
  if (!(edge_threshold > 0.0)) throw InvalidArgument("edge_threshold must be positive");
  if (orientation_radius < 1) throw InvalidArgument("orientation_radius must be >= 1");
  if (border < 1) throw InvalidArgument("border must be >= 1");
}

void RunConfig::validate() const {
  sim.validate();
  pipeline.validate();
  if (padding.min_batch < 1) throw InvalidArgument("decoy_min_batch must be >= 1");
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument("bad value '" + v + "' for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("bad boolean '" + v + "' for " + key);
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& v)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"depth_budget", [](RunConfig& c, auto& k, auto& v) { c.sim.depth_budget = parse_number<int>(k, v); }},
      {"noise_per_mul", [](RunConfig& c, auto& k, auto& v) { c.sim.noise_per_mul = parse_number<double>(k, v); }},
      {"plain_mul_consumes_level", [](RunConfig& c, auto& k, auto& v) { c.sim.plain_mul_consumes_level = parse_bool(k, v); }},
      {"octaves", [](RunConfig& c, auto& k, auto& v) { c.pipeline.octaves = parse_number<int>(k, v); }},
      {"scales_per_octave", [](RunConfig& c, auto& k, auto& v) { c.pipeline.scales_per_octave = parse_number<int>(k, v); }},
      {"base_sigma", [](RunConfig& c, auto& k, auto& v) { c.pipeline.base_sigma = parse_number<double>(k, v); }},
      {"orientation_bins", [](RunConfig& c, auto& k, auto& v) { c.pipeline.orientation_bins = parse_number<int>(k, v); }},
      {"descriptor_grid",
       [](RunConfig& c, auto& k, auto& v) {
         // "4,4,8": cells across, cells down, angle bins.
         std::istringstream in(v);
         std::string a, b, n;
         if (!std::getline(in, a, ',') || !std::getline(in, b, ',') || !std::getline(in, n) ||
             boost::algorithm::trim_copy(a) != boost::algorithm::trim_copy(b)) {
           throw InvalidArgument("descriptor_grid must be 'n,n,bins', got '" + v + "'");
         }
         c.pipeline.descriptor_cells = parse_number<int>(k, boost::algorithm::trim_copy(a));
         c.pipeline.descriptor_bins = parse_number<int>(k, boost::algorithm::trim_copy(n));
       }},
      {"contrast_threshold", [](RunConfig& c, auto& k, auto& v) { c.pipeline.contrast_threshold = parse_number<double>(k, v); }},
      {"edge_threshold", [](RunConfig& c, auto& k, auto& v) { c.pipeline.edge_threshold = parse_number<double>(k, v); }},
      {"orientation_weighting",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "squared") {
           c.pipeline.orientation_weighting = OrientationWeighting::Squared;
         } else if (v == "sqrt") {
           c.pipeline.orientation_weighting = OrientationWeighting::Sqrt;
         } else {
           throw InvalidArgument("bad value '" + v + "' for " + k + " (squared or sqrt)");
         }
       }},
      {"orientation_radius", [](RunConfig& c, auto& k, auto& v) { c.pipeline.orientation_radius = parse_number<int>(k, v); }},
      {"border", [](RunConfig& c, auto& k, auto& v) { c.pipeline.border = parse_number<int>(k, v); }},
      {"mode", [](RunConfig& c, auto&, auto& v) { c.mode = parse_mode(v); }},
      {"decoy_min_batch", [](RunConfig& c, auto& k, auto& v) { c.padding.min_batch = parse_number<std::size_t>(k, v); }},
      {"decoy_power_of_two", [](RunConfig& c, auto& k, auto& v) { c.padding.power_of_two = parse_bool(k, v); }},
      {"seed", [](RunConfig& c, auto& k, auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
  };
  return table;
}

}  // namespace

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::size_t line_start = 0;
  while (line_start < text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::string line = text.substr(line_start, line_end - line_start);
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    boost::algorithm::trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_start);
      const std::string key = boost::algorithm::trim_copy(line.substr(0, eq));
      const std::string value = boost::algorithm::trim_copy(line.substr(eq + 1));
      const auto it = setters().find(key);
      if (it == setters().end()) throw ParseError("unknown config key '" + key + "'", line_start);
      if (value.empty()) throw ParseError("missing value for '" + key + "'", line_start);
      try {
        it->second(base, key, value);
      } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), line_start);
      }
    }
    line_start = line_end + 1;
  }
  base.validate();
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  const auto bytes = read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()), base);
}

std::string format_config(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  const PipelineConfig& p = c.pipeline;
  out << "depth_budget = " << c.sim.depth_budget << "\n"
      << "noise_per_mul = " << c.sim.noise_per_mul << "\n"
      << "plain_mul_consumes_level = " << (c.sim.plain_mul_consumes_level ? "true" : "false") << "\n"
      << "octaves = " << p.octaves << "\n"
      << "scales_per_octave = " << p.scales_per_octave << "\n"
      << "base_sigma = " << p.base_sigma << "\n"
      << "orientation_bins = " << p.orientation_bins << "\n"
      << "descriptor_grid = " << p.descriptor_cells << "," << p.descriptor_cells << ","
      << p.descriptor_bins << "\n"
      << "contrast_threshold = " << p.contrast_threshold << "\n"
      << "edge_threshold = " << p.edge_threshold << "\n"
      << "orientation_weighting = "
      << (p.orientation_weighting == OrientationWeighting::Squared ? "squared" : "sqrt") << "\n"
      << "orientation_radius = " << p.orientation_radius << "\n"
      << "border = " << p.border << "\n"
      << "mode = " << mode_name(c.mode) << "\n"
      << "decoy_min_batch = " << c.padding.min_batch << "\n"
      << "decoy_power_of_two = " << (c.padding.power_of_two ? "true" : "false") << "\n"
      << "seed = " << c.seed << "\n";
  return out.str();
}

}  // namespace fheadapt
