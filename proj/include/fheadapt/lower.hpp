// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Evaluation of graphs on the server: directly to ciphertexts once every
// comparison is resolved (interactive), or into residual polynomials whose
// coefficients are ciphertexts (deferred).

#ifndef FHEADAPT_LOWER_HPP_
#define FHEADAPT_LOWER_HPP_

#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fheadapt/graph.hpp"
#include "fheadapt/residual.hpp"
#include "fheadapt/sim.hpp"

namespace fheadapt::deferred {

// A coefficient that may still be a public constant. Public constants are
// only encrypted when they have to leave the server.
struct NumCoef {
  bool is_plain = true;
  double k = 0.0;
  sim::Ciphertext ct;

  static NumCoef plain(double k) { return NumCoef{true, k, {}}; }
  static NumCoef cipher(const sim::Ciphertext& ct) { return NumCoef{false, 0.0, ct}; }
};

class NumericRing {
 public:
  using Coef = NumCoef;
  explicit NumericRing(sim::Evaluator& ev) : ev_(&ev) {}

  NumCoef add(const NumCoef& a, const NumCoef& b) const;
  NumCoef mul(const NumCoef& a, const NumCoef& b) const;
  bool is_zero(const NumCoef& c) const { return c.is_plain && c.k == 0.0; }
  sim::Ciphertext ship(const NumCoef& c) const;

 private:
  sim::Evaluator* ev_;
};

// Interactive-mode evaluator for one graph. Comparison and sqrt outcomes
// must be supplied (as fresh ciphertexts from the client) before any node
// depending on them is evaluated.
class CipherEvaluator {
 public:
  CipherEvaluator(Graph& g, sim::Evaluator& ev);

  void resolve(ParamId p, const sim::Ciphertext& ct);
  bool resolved(ParamId p) const { return resolved_.contains(p.raw); }
  NumCoef eval(Expr e);
  sim::Ciphertext eval_cipher(Expr e);

 private:
  NumCoef compute(const Node& n, std::uint32_t id);

  Graph& g_;
  NumericRing ring_;
  std::vector<NumCoef> memo_;
  std::vector<std::uint8_t> done_;
  std::unordered_map<std::uint64_t, sim::Ciphertext> resolved_;
};

struct LowerOptions {
  // A product of two polynomials with more than this many raw terms binds
  // the larger operand to a value parameter first.
  std::size_t bind_product_terms = 32;
  // Nodes used more than once whose polynomial exceeds this many terms are
  // bound, so the polynomial is shipped once.
  std::size_t bind_shared_terms = 2;
};

// Deferred-mode lowering into a growing package. Comparison and sqrt records
// are emitted once per id no matter how many targets reach them.
class Lowerer {
 public:
  Lowerer(sim::Evaluator& ev, DeferredPackage& pkg, LowerOptions opts = {});

  std::vector<ResidualFunction> lower(Graph& g, std::span<const Expr> targets);
  // Parameter-free results become ciphertext values; the rest are bound.
  std::vector<Value> materialize(Graph& g, std::span<const Expr> targets);
  // Drops per-graph state; call when the graph is cleared.
  void forget_graph() { bound_.clear(); }

  const DeferredPackage& package() const { return pkg_; }

 private:
  struct Impl;

  sim::Evaluator& ev_;
  DeferredPackage& pkg_;
  LowerOptions opts_;
  NumericRing ring_;
  std::unordered_set<std::uint64_t> emitted_comparisons_;
  std::unordered_set<std::uint64_t> emitted_sqrts_;
  std::unordered_map<std::uint32_t, ParamId> bound_;
};

// Lowers targets into a fresh package with one slot named "out".
DeferredPackage lower(std::span<const Expr> targets, sim::Evaluator& ev,
                      LowerOptions opts = {});

}  // namespace fheadapt::deferred

#endif  // FHEADAPT_LOWER_HPP_
