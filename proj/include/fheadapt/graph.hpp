// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Server-side symbolic computation graph. Nodes are hash-consed, so building
// the same subterm twice yields the same node, and every node id is larger
// than the ids of its operands (ascending id order is a topological order).
//
// Comparison results are not known to the server; they enter the graph as
// boolean variables and are resolved either interactively (the client returns
// fresh encrypted booleans) or after the fact (the client substitutes them
// into a residual polynomial).

#ifndef FHEADAPT_GRAPH_HPP_
#define FHEADAPT_GRAPH_HPP_

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fheadapt/sim.hpp"

namespace fheadapt::deferred {

using ComparisonId = std::uint64_t;

enum class ParamKind : std::uint8_t { Bool = 1, Sqrt = 2, Value = 3 };

// Parameter of a residual function: a comparison outcome, a square root the
// client computes, or a value the server bound to a name.
struct ParamId {
  std::uint64_t raw = 0;

  static constexpr ParamId make(ParamKind kind, std::uint64_t index) {
    return ParamId{(static_cast<std::uint64_t>(kind) << 56) |
                   (index & kIndexMask)};
  }
  constexpr ParamKind kind() const {
    return static_cast<ParamKind>(raw >> 56);
  }
  constexpr std::uint64_t index() const { return raw & kIndexMask; }
  constexpr bool idempotent() const { return kind() == ParamKind::Bool; }

  auto operator<=>(const ParamId&) const = default;

  static constexpr std::uint64_t kIndexMask = (std::uint64_t{1} << 56) - 1;
};

std::string to_string(ParamId p);

// Id counters shared by every graph of one run, so that parameters created
// in different stages never collide.
class IdSource {
 public:
  ComparisonId next_comparison() { return next_comparison_++; }
  std::uint64_t next_sqrt() { return next_sqrt_++; }
  std::uint64_t next_value() { return next_value_++; }
  std::uint64_t next_leaf() { return next_leaf_++; }

 private:
  ComparisonId next_comparison_ = 1;
  std::uint64_t next_sqrt_ = 1;
  std::uint64_t next_value_ = 1;
  std::uint64_t next_leaf_ = 1;
};

// A materialized quantity that outlives the graph it was computed in: either
// a ciphertext the server holds or a parameter the client will resolve.
struct Value {
  enum class Kind : std::uint8_t { Cipher, Param };
  Kind kind = Kind::Cipher;
  std::uint64_t key = 0;  // leaf identity for Cipher values
  sim::Ciphertext ct;
  ParamId param;

  static Value cipher(std::uint64_t key, const sim::Ciphertext& ct) {
    return Value{Kind::Cipher, key, ct, {}};
  }
  static Value of_param(ParamId p) { return Value{Kind::Param, 0, {}, p}; }
};

enum class NodeKind : std::uint8_t { Cipher, Plain, Add, Mul, BoolVar, Sqrt, Param };

struct Node {
  NodeKind kind = NodeKind::Plain;
  std::uint32_t lhs = 0;
  std::uint32_t rhs = 0;
  double constant = 0.0;
  std::uint64_t key = 0;  // leaf key, comparison id, sqrt id or ParamId::raw
};

class Graph;

class Expr {
 public:
  Expr() = default;
  Expr(Graph* g, std::uint32_t id) : graph_(g), id_(id) {}

  Graph* graph() const { return graph_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }
  const Node& node() const;
  NodeKind kind() const { return node().kind; }

  bool is_plain() const { return kind() == NodeKind::Plain; }
  bool is_plain(double k) const { return is_plain() && node().constant == k; }
  double plain_value() const { return node().constant; }

  bool operator==(const Expr& o) const {
    return graph_ == o.graph_ && id_ == o.id_;
  }

 private:
  Graph* graph_ = nullptr;
  std::uint32_t id_ = 0;
};

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator+(Expr a, double k);
Expr operator+(double k, Expr a);
Expr operator-(Expr a, double k);
Expr operator-(double k, Expr a);
Expr operator*(Expr a, double k);
Expr operator*(double k, Expr a);

// One canonical comparison: value is [lhs > rhs].
struct Comparison {
  ComparisonId id = 0;
  Expr lhs;
  Expr rhs;
};

class Graph {
 public:
  explicit Graph(std::shared_ptr<IdSource> ids = nullptr);
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  IdSource& ids() { return *ids_; }
  const std::shared_ptr<IdSource>& id_source() const { return ids_; }

  Expr plain(double k);
  // Fresh encrypted leaf; never shared with another cipher() call.
  Expr cipher(const sim::Ciphertext& ct, std::string name = {});
  Expr leaf(const Value& v);
  Expr param(ParamId p);

  Expr add(Expr a, Expr b);
  Expr mul(Expr a, Expr b);
  Expr neg(Expr a);
  Expr sub(Expr a, Expr b);

  // [a > b]. Each ordered operand pair owns one comparison. [b > a] is a
  // separate comparison: 1 - [a > b] would be wrong on ties.
  Expr greater(Expr a, Expr b);
  Expr sqrt(Expr a);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::uint32_t id) const { return nodes_[id]; }
  Expr expr(std::uint32_t id) { return Expr(this, id); }

  const sim::Ciphertext& cipher_of(std::uint32_t id) const;
  const std::string& name_of(std::uint32_t id) const;
  const Comparison& comparison(ComparisonId id) const;
  const std::vector<Comparison>& comparisons() const { return comparisons_; }
  // Parameter carried by a BoolVar, Sqrt or Param node.
  ParamId param_of(std::uint32_t id) const;

  void clear();

 private:
  std::uint32_t intern(const Node& n);
  void grow_table();
  bool same_signature(const Node& a, const Node& b) const;
  std::uint64_t signature_hash(const Node& n) const;

  std::shared_ptr<IdSource> ids_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> table_;  // open addressing, slot = id + 1
  std::vector<sim::Ciphertext> ciphers_;
  std::unordered_map<std::uint32_t, std::string> names_;
  std::vector<Comparison> comparisons_;
  std::unordered_map<ComparisonId, std::uint32_t> comparison_index_;
  std::unordered_map<std::uint64_t, ComparisonId> pair_index_;
};

// ---------------------------------------------------------------------------
// Builders

Expr compare(Expr a, Expr b);        // [a > b]
Expr greater_equal(Expr a, Expr b);  // 1 - [b > a]
// cond * (then - else_) + else_; cond must be semantically boolean.
Expr select(Expr cond, Expr then, Expr else_);
Expr sqrt_deferred(Expr arg);

// Balanced reductions, so that a product of n factors costs ceil(log2 n)
// levels rather than n - 1.
Expr sum(Graph& g, std::span<const Expr> terms);
Expr product(Graph& g, std::span<const Expr> factors);

// ---------------------------------------------------------------------------
// Rational deferral: a quotient kept as (numerator, denominator). Comparisons
// are cross-multiplied; no inverse is ever computed.

enum class DenSign { Positive, Negative, Unknown };

struct Rational {
  Expr num;
  Expr den;
  DenSign den_sign = DenSign::Positive;
};

struct SignPolicy {
  // When false, an Unknown denominator sign raises SignUnresolvable instead
  // of costing an extra comparison [den > 0].
  bool resolve_unknown = true;
};

// The caller guarantees den != 0.
Rational rational_div(Expr num, Expr den, DenSign den_sign);
Rational as_rational(Expr e);

// [r < s]
Expr rational_less(const Rational& r, const Rational& s, SignPolicy policy = {});
Expr rational_less(const Rational& r, Expr s, SignPolicy policy = {});
// [r <= s] = 1 - [s < r]
Expr rational_less_equal(const Rational& r, const Rational& s,
                         SignPolicy policy = {});

// ---------------------------------------------------------------------------
// Multilinear normal form over parameters with Expr coefficients.

struct NormalTerm {
  std::vector<ParamId> monomial;  // sorted; booleans appear at most once
  Expr coefficient;               // parameter-free
};

struct NormalForm {
  std::vector<NormalTerm> terms;  // canonical order, see dump()
};

NormalForm normal_form(Expr e);
Expr rebuild(Graph& g, const NormalForm& nf);
Expr simplify(Expr e);

// Infix rendering of a parameter-free expression, e.g. "c - e".
std::string render(Expr e);
// One line per monomial, "{c1}: c - e", constant term last.
std::string dump(const NormalForm& nf);

// Longest chain of comparisons/square roots that must be resolved one after
// another to evaluate the targets.
std::size_t dependency_depth(Graph& g, std::span<const Expr> targets);

}  // namespace fheadapt::deferred

#endif  // FHEADAPT_GRAPH_HPP_
