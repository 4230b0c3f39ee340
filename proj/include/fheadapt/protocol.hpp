// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Two-party execution. The server runs a program against a Session; every
// message between server and client crosses a byte boundary so rounds and
// traffic can be counted.
//
// Interactive mode: comparisons (and square roots) are batched by dependency
// depth, padded with decoys and answered by the client with fresh encrypted
// results. Deferred mode: the program is lowered into one package that the
// client resolves locally in a single round.

#ifndef FHEADAPT_PROTOCOL_HPP_
#define FHEADAPT_PROTOCOL_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fheadapt/graph.hpp"
#include "fheadapt/lower.hpp"
#include "fheadapt/residual.hpp"
#include "fheadapt/sim.hpp"

namespace fheadapt::protocol {

using deferred::Expr;
using deferred::Graph;
using deferred::Value;

struct PaddingPolicy {
  std::size_t min_batch = 8;
  bool power_of_two = true;
};

std::size_t padded_size(std::size_t real, const PaddingPolicy& policy);

struct ComparisonRequest {
  std::uint64_t id = 0;
  sim::Ciphertext lhs;
  sim::Ciphertext rhs;
  bool decoy = false;  // server-side bookkeeping, never serialized
};

// Pads to padded_size() with decoys whose operands are re-randomized copies
// of operands already in the batch (fresh random encryptions if the batch is
// empty), then shuffles. Real requests keep their ids.
std::vector<ComparisonRequest> pad_with_decoys(std::vector<ComparisonRequest> batch,
                                               const PaddingPolicy& policy,
                                               sim::Evaluator& ev, std::mt19937_64& rng);

struct ProtocolOptions {
  sim::SimParams sim;
  std::uint64_t seed = 0;
  PaddingPolicy padding;
  deferred::LowerOptions lowering;
};

struct RoundRecord {
  std::string stage;
  std::size_t real = 0;
  std::size_t decoys = 0;
  std::size_t sqrts = 0;
  std::size_t bytes_to_client = 0;
  std::size_t bytes_to_server = 0;
};

struct RoundTrace {
  std::vector<RoundRecord> rounds;
  std::size_t input_bytes = 0;   // encrypted inputs, client to server
  std::size_t output_bytes = 0;  // encrypted outputs, server to client

  std::size_t real_requests() const;
  std::size_t decoy_requests() const;
  std::size_t sqrt_requests() const;
  std::size_t bytes() const;
};

struct StageStats {
  std::string name;
  sim::OpCounts ops;
  int min_level = 0;  // lowest ciphertext level produced during the stage
  std::size_t rounds = 0;
  std::size_t real_requests = 0;
  std::size_t decoy_requests = 0;
  std::size_t sqrt_requests = 0;
  std::vector<std::size_t> batch_sizes;  // padded comparison batches
  std::size_t bytes = 0;
  // Comparison/sqrt dependency depth of everything the stage resolved,
  // measured on the graph independently of the protocol.
  std::size_t dependency_depth = 0;
  deferred::LeakageMetric leakage;
};

// The data owner. Holds the secret key; encrypts inputs and answers
// requests.
class Client {
 public:
  explicit Client(sim::SimParams params, std::uint64_t seed = 0);

  std::vector<std::uint8_t> encrypt_inputs(std::span<const double> xs);
  std::vector<std::uint8_t> answer_round(std::span<const std::uint8_t> request);
  std::map<std::string, std::vector<double>> open_outputs(
      std::span<const std::uint8_t> message);
  std::map<std::string, std::vector<double>> resolve_package(
      std::span<const std::uint8_t> message);

  std::uint64_t comparisons_answered() const { return comparisons_answered_; }

 private:
  sim::Evaluator ev_;
  sim::Decryptor dec_;
  std::uint64_t comparisons_answered_ = 0;
};

struct OutputGroup {
  std::string name;
  std::vector<Expr> targets;
};

class Session {
 public:
  virtual ~Session() = default;

  Graph& graph() { return graph_; }
  sim::Evaluator& evaluator() { return ev_; }
  const std::vector<Value>& inputs() const { return inputs_; }
  virtual bool deferred_mode() const = 0;

  // Starts a named stage and clears the graph. Values survive stages;
  // expressions do not.
  void begin_stage(const std::string& name);
  const std::string& stage() const { return stage_name_; }

  // Resolves whatever the targets depend on and returns values usable as
  // leaves of later graphs.
  virtual std::vector<Value> materialize(std::span<const Expr> targets) = 0;
  // Appends the targets to the named output groups. All groups are resolved
  // together, so they share rounds.
  virtual void output(std::span<const OutputGroup> groups) = 0;
  void output(const std::string& group, std::span<const Expr> targets);
  // Drops every expression of the current stage while keeping its
  // statistics open. Values stay valid.
  virtual void reset_graph() = 0;
  // The target as a ciphertext the server can keep computing on. Deferred
  // mode cannot provide this for anything that depends on a comparison.
  virtual std::vector<sim::Ciphertext> require_ciphers(std::span<const Expr> targets) = 0;
  sim::Ciphertext require_cipher(Expr target) { return require_ciphers({&target, 1})[0]; }

  Expr leaf(const Value& v) { return graph_.leaf(v); }

 protected:
  Session(const ProtocolOptions& opts, Client& client);
  virtual void finish_stage() = 0;
  void finish();
  StageStats& current() { return stages_.back(); }

  ProtocolOptions opts_;
  Client& client_;
  sim::Evaluator ev_;
  Graph graph_;
  std::mt19937_64 rng_;
  std::vector<Value> inputs_;
  std::string stage_name_;
  std::vector<StageStats> stages_;
  sim::OpCounts stage_start_ops_;
  RoundTrace trace_;
  std::map<std::string, std::vector<double>> outputs_;

  friend struct Runner;
};

using Program = std::function<void(Session&)>;

struct RunResult {
  std::map<std::string, std::vector<double>> outputs;
  RoundTrace trace;
  std::vector<StageStats> stages;
  deferred::LeakageMetric leakage;
};

// Both throw DepthExhausted naming the stage that ran out of levels.
RunResult run_interactive(const Program& program, Client& client,
                          std::span<const double> inputs, const ProtocolOptions& opts);
RunResult run_deferred(const Program& program, Client& client,
                       std::span<const double> inputs, const ProtocolOptions& opts);

// Package serialization, shared by the server and the client.
std::vector<std::uint8_t> serialize_package(const deferred::DeferredPackage& pkg);
deferred::DeferredPackage parse_package(std::span<const std::uint8_t> bytes);
// Human-readable package listing; coefficients shown as decrypted values.
std::string dump_package(const deferred::DeferredPackage& pkg);

}  // namespace fheadapt::protocol

#endif  // FHEADAPT_PROTOCOL_HPP_
