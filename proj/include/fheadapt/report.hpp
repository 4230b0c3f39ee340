// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Run reports and trace files. report.kv is "key = value" per line; trace.txt
// has one line per protocol round and is enough to recompute every request
// and byte count in the report.

#ifndef FHEADAPT_REPORT_HPP_
#define FHEADAPT_REPORT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fheadapt/config.hpp"
#include "fheadapt/keypoints.hpp"
#include "fheadapt/protocol.hpp"
#include "fheadapt/sift.hpp"

namespace fheadapt::report {

struct StageReport {
  std::string name;
  int levels_consumed = 0;
  std::size_t rounds = 0;
  std::size_t real_requests = 0;
  std::size_t decoy_requests = 0;
  std::size_t sqrt_requests = 0;
  std::size_t bytes = 0;
  std::size_t dependency_depth = 0;
  sim::OpCounts ops;
};

struct RunReport {
  std::string mode;
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  int depth_budget = 0;
  std::vector<StageReport> stages;
  std::size_t rounds = 0;
  std::size_t real_requests = 0;
  std::size_t decoy_requests = 0;
  std::size_t sqrt_requests = 0;
  std::size_t bytes = 0;
  std::size_t input_bytes = 0;
  std::size_t output_bytes = 0;
  std::size_t candidates = 0;
  std::size_t keypoints = 0;
  std::size_t ambiguous = 0;
  std::uint64_t server_decrypts = 0;
  std::size_t leakage_monomials = 0;
  std::size_t leakage_parameters = 0;
  double max_onehot_error = 0.0;
  double max_conservation_error = 0.0;
  std::optional<DiffSummary> diff;
};

RunReport make_report(const sift::PipelineResult& result, const RunConfig& cfg, int width,
                      int height);

std::string format_kv(const RunReport& r);
// Throws ParseError on malformed lines or unknown keys.
RunReport parse_kv(const std::string& text);
std::string format_text(const RunReport& r);

std::string format_trace(const protocol::RoundTrace& trace);
protocol::RoundTrace parse_trace(const std::string& text);

}  // namespace fheadapt::report

#endif  // FHEADAPT_REPORT_HPP_
