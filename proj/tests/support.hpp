// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Shared test helpers: a plaintext interpreter for graphs and the random
// expression generator used by the soundness checks.

#ifndef FHEADAPT_TESTS_SUPPORT_HPP_
#define FHEADAPT_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "fheadapt/graph.hpp"
#include "fheadapt/image.hpp"
#include "fheadapt/protocol.hpp"

namespace fheadapt::testing {

// Evaluates a graph on the plaintext carried by its leaves, resolving each
// comparison with an ordinary '>' and each square root with std::sqrt.
class PlainEval {
 public:
  explicit PlainEval(deferred::Graph& g) : g_(g) {}

  double operator()(deferred::Expr e) {
    using deferred::NodeKind;
    if (memo_.size() < g_.size()) {
      memo_.resize(g_.size(), 0.0);
      done_.resize(g_.size(), 0);
    }
    const std::uint32_t id = e.id();
    if (done_[id]) return memo_[id];
    const deferred::Node& n = g_.node(id);
    double v = 0.0;
    switch (n.kind) {
      case NodeKind::Cipher:
        v = g_.cipher_of(id).value;
        break;
      case NodeKind::Plain:
        v = n.constant;
        break;
      case NodeKind::Add:
        v = (*this)(g_.expr(n.lhs)) + (*this)(g_.expr(n.rhs));
        break;
      case NodeKind::Mul:
        v = (*this)(g_.expr(n.lhs)) * (*this)(g_.expr(n.rhs));
        break;
      case NodeKind::BoolVar:
        v = (*this)(g_.expr(n.lhs)) > (*this)(g_.expr(n.rhs)) ? 1.0 : 0.0;
        break;
      case NodeKind::Sqrt:
        v = std::sqrt((*this)(g_.expr(n.lhs)));
        break;
      case NodeKind::Param:
        throw InvalidArgument("PlainEval cannot resolve value parameters");
    }
    memo_[id] = v;
    done_[id] = 1;
    return v;
  }

 private:
  deferred::Graph& g_;
  std::vector<double> memo_;
  std::vector<std::uint8_t> done_;
};

// Random expression over a few inputs with ordinary control flow, so it can
// be evaluated branchily and built as a branchless graph.
struct RandomExpr {
  enum class Op { Input, Const, Add, Sub, Mul, Select, SelectGe, Sqrt };
  Op op = Op::Const;
  int input = 0;
  double k = 0.0;
  std::vector<std::unique_ptr<RandomExpr>> kids;  // Select: a, b, then, else
};

struct ExprShape {
  int inputs = 4;
  int max_depth = 8;
  int max_comparisons = 4;
  int max_sqrts = 2;
};

class ExprGenerator {
 public:
  ExprGenerator(std::uint64_t seed, ExprShape shape) : rng_(seed), shape_(shape) {}

  std::unique_ptr<RandomExpr> next() {
    comparisons_ = 0;
    sqrts_ = 0;
    return node(shape_.max_depth);
  }

  std::vector<double> inputs() {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> xs(std::size_t(shape_.inputs));
    for (double& x : xs) x = u(rng_);
    return xs;
  }

 private:
  std::unique_ptr<RandomExpr> node(int depth) {
    auto e = std::make_unique<RandomExpr>();
    using Op = RandomExpr::Op;
    std::uniform_int_distribution<int> pick(0, depth <= 1 ? 1 : 7);
    Op op = static_cast<Op>(pick(rng_));
    if ((op == Op::Select || op == Op::SelectGe) && comparisons_ >= shape_.max_comparisons) op = Op::Add;
    if (op == Op::Sqrt && sqrts_ >= shape_.max_sqrts) op = Op::Sub;
    e->op = op;
    switch (op) {
      case Op::Input:
        e->input = std::uniform_int_distribution<int>(0, shape_.inputs - 1)(rng_);
        break;
      case Op::Const:
        e->k = std::uniform_real_distribution<double>(-1.5, 1.5)(rng_);
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
        e->kids.push_back(node(depth - 1));
        e->kids.push_back(node(depth - 1));
        break;
      case Op::Select:
      case Op::SelectGe:
        ++comparisons_;
        for (int i = 0; i < 4; ++i) e->kids.push_back(node(depth - 1));
        break;
      case Op::Sqrt:
        ++sqrts_;
        e->kids.push_back(node(depth - 1));
        break;
    }
    return e;
  }

  std::mt19937_64 rng_;
  ExprShape shape_;
  int comparisons_ = 0;
  int sqrts_ = 0;
};

// Branchy reference. Both arms of a select are evaluated so that margin (the
// closest comparison) and scale (the largest intermediate magnitude) cover
// everything the branchless form touches.
struct BranchyEval {
  const std::vector<double>& xs;
  double margin = INFINITY;
  double scale = 1.0;

  double operator()(const RandomExpr& e) {
    const double v = eval(e);
    scale = std::max(scale, std::abs(v));
    return v;
  }

 private:
  double eval(const RandomExpr& e) {
    using Op = RandomExpr::Op;
    auto kid = [&](int i) { return (*this)(*e.kids[std::size_t(i)]); };
    switch (e.op) {
      case Op::Input:
        return xs[std::size_t(e.input)];
      case Op::Const:
        return e.k;
      case Op::Add:
        return kid(0) + kid(1);
      case Op::Sub:
        return kid(0) - kid(1);
      case Op::Mul:
        return kid(0) * kid(1);
      case Op::Select:
      case Op::SelectGe: {
        const double a = kid(0);
        const double b = kid(1);
        const double t = kid(2);
        const double f = kid(3);
        margin = std::min(margin, std::abs(a - b));
        scale = std::max(scale, std::abs(t - f));
        if (e.op == Op::Select) return a > b ? t : f;
        return a >= b ? t : f;
      }
      case Op::Sqrt: {
        const double v = kid(0);
        scale = std::max(scale, v * v);
        return std::sqrt(v * v + 0.25);
      }
    }
    return 0.0;
  }
};

// The same expression as a branchless graph.
inline deferred::Expr build(deferred::Graph& g, const RandomExpr& e,
                            const std::vector<deferred::Expr>& leaves) {
  using Op = RandomExpr::Op;
  auto kid = [&](int i) { return build(g, *e.kids[std::size_t(i)], leaves); };
  switch (e.op) {
    case Op::Input:
      return leaves[std::size_t(e.input)];
    case Op::Const:
      return g.plain(e.k);
    case Op::Add:
      return kid(0) + kid(1);
    case Op::Sub:
      return kid(0) - kid(1);
    case Op::Mul:
      return kid(0) * kid(1);
    case Op::Select:
      return deferred::select(deferred::compare(kid(0), kid(1)), kid(2), kid(3));
    case Op::SelectGe:
      return deferred::select(deferred::greater_equal(kid(0), kid(1)), kid(2), kid(3));
    case Op::Sqrt: {
      const deferred::Expr v = kid(0);
      return deferred::sqrt_deferred(v * v + 0.25);
    }
  }
  return g.plain(0.0);
}

inline std::string data_path(const std::string& name) {
  return std::string(FHEADAPT_TEST_DATA) + "/" + name;
}

inline Image load_image(const std::string& name) { return read_pgm(data_path(name)); }

}  // namespace fheadapt::testing

#endif  // FHEADAPT_TESTS_SUPPORT_HPP_
