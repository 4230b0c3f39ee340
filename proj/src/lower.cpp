// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/lower.hpp"

#include <algorithm>

#include "poly.hpp"

namespace fheadapt::deferred {

NumCoef NumericRing::add(const NumCoef& a, const NumCoef& b) const {
  if (a.is_plain && b.is_plain) return NumCoef::plain(a.k + b.k);
  if (a.is_plain) return a.k == 0.0 ? b : NumCoef::cipher(ev_->add_plain(b.ct, a.k));
  if (b.is_plain) return b.k == 0.0 ? a : NumCoef::cipher(ev_->add_plain(a.ct, b.k));
  return NumCoef::cipher(ev_->add(a.ct, b.ct));
}

NumCoef NumericRing::mul(const NumCoef& a, const NumCoef& b) const {
  if (a.is_plain && b.is_plain) return NumCoef::plain(a.k * b.k);
  if (b.is_plain) return mul(b, a);
  if (a.is_plain) {
    if (a.k == 0.0) return NumCoef::plain(0.0);
    if (a.k == 1.0) return b;
    if (a.k == -1.0) return NumCoef::cipher(ev_->neg(b.ct));
    return NumCoef::cipher(ev_->mul_plain(b.ct, a.k));
  }
  return NumCoef::cipher(ev_->mul(a.ct, b.ct));
}

sim::Ciphertext NumericRing::ship(const NumCoef& c) const {
  return c.is_plain ? ev_->encrypt(c.k) : c.ct;
}

// ---------------------------------------------------------------------------

CipherEvaluator::CipherEvaluator(Graph& g, sim::Evaluator& ev) : g_(g), ring_(ev) {}

void CipherEvaluator::resolve(ParamId p, const sim::Ciphertext& ct) {
  resolved_[p.raw] = ct;
}

NumCoef CipherEvaluator::compute(const Node& n, std::uint32_t id) {
  switch (n.kind) {
    case NodeKind::Plain:
      return NumCoef::plain(n.constant);
    case NodeKind::Cipher:
      return NumCoef::cipher(g_.cipher_of(id));
    case NodeKind::Add:
      return ring_.add(memo_[n.lhs], memo_[n.rhs]);
    case NodeKind::Mul:
      return ring_.mul(memo_[n.lhs], memo_[n.rhs]);
    default: {
      const ParamId p = g_.param_of(id);
      auto it = resolved_.find(p.raw);
      if (it == resolved_.end()) {
        throw Error("parameter " + to_string(p) + " used before it was resolved");
      }
      return NumCoef::cipher(it->second);
    }
  }
}

NumCoef CipherEvaluator::eval(Expr e) {
  if (memo_.size() < g_.size()) {
    memo_.resize(g_.size());
    done_.resize(g_.size(), 0);
  }
  std::vector<std::uint32_t> stack{e.id()};
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    if (done_[id]) {
      stack.pop_back();
      continue;
    }
    const Node& n = g_.node(id);
    if (n.kind == NodeKind::Add || n.kind == NodeKind::Mul) {
      const bool ready = done_[n.lhs] && done_[n.rhs];
      if (!ready) {
        if (!done_[n.lhs]) stack.push_back(n.lhs);
        if (!done_[n.rhs]) stack.push_back(n.rhs);
        continue;
      }
    }
    memo_[id] = compute(n, id);
    done_[id] = 1;
    stack.pop_back();
  }
  return memo_[e.id()];
}

sim::Ciphertext CipherEvaluator::eval_cipher(Expr e) { return ring_.ship(eval(e)); }

// ---------------------------------------------------------------------------

struct Lowerer::Impl {
  using P = detail::Poly<NumCoef>;

  static ResidualFunction ship(const Lowerer& l, const P& p) {
    ResidualFunction f;
    for (const auto& t : p) f.add_term({t.mono.data(), t.mono.size()}, l.ring_.ship(t.coef));
    return f;
  }

  static bool is_bare_atom(const P& p) {
    return p.size() == 1 && p[0].mono.size() == 1 && p[0].coef.is_plain &&
           p[0].coef.k == 1.0;
  }

  static bool bindable(const P& p) { return !detail::parameter_free(p) && !is_bare_atom(p); }

  static P bind(Lowerer& l, Graph& g, std::uint32_t id, const P& p) {
    const ParamId v = ParamId::make(ParamKind::Value, g.ids().next_value());
    l.pkg_.values.push_back(ValueRecord{v.index(), ship(l, p)});
    l.bound_[id] = v;
    return detail::PolyOps<NumericRing>(l.ring_).atom(v, NumCoef::plain(1.0));
  }

  // Operands that have to be expanded to lower node id right now.
  static std::size_t children(const Lowerer& l, const Graph& g, std::uint32_t id,
                              std::uint32_t out[2]) {
    if (l.bound_.contains(id)) return 0;
    const Node& n = g.node(id);
    switch (n.kind) {
      case NodeKind::Add:
      case NodeKind::Mul:
        out[0] = n.lhs;
        out[1] = n.rhs;
        return 2;
      case NodeKind::BoolVar:
        if (l.emitted_comparisons_.contains(n.key)) return 0;
        out[0] = n.lhs;
        out[1] = n.rhs;
        return 2;
      case NodeKind::Sqrt:
        if (l.emitted_sqrts_.contains(n.key)) return 0;
        out[0] = n.lhs;
        return 1;
      default:
        return 0;
    }
  }

  static std::vector<P> lower_polys(Lowerer& l, Graph& g, std::span<const Expr> targets) {
    detail::PolyOps<NumericRing> ops(l.ring_);
    std::unordered_map<std::uint32_t, std::uint32_t> uses;
    std::unordered_set<std::uint32_t> request_operands;
    std::vector<std::uint32_t> order;
    std::vector<std::uint32_t> stack;
    auto discover = [&](std::uint32_t id) {
      if (uses[id]++ == 0) {
        stack.push_back(id);
        order.push_back(id);
      }
    };
    for (const Expr& t : targets) {
      if (t.graph() != &g) throw InvalidArgument("target from a different graph");
      discover(t.id());
    }
    while (!stack.empty()) {
      const std::uint32_t id = stack.back();
      stack.pop_back();
      std::uint32_t kids[2];
      const std::size_t nk = children(l, g, id, kids);
      const NodeKind kind = g.node(id).kind;
      for (std::size_t i = 0; i < nk; ++i) {
        if (kind == NodeKind::BoolVar || kind == NodeKind::Sqrt) {
          request_operands.insert(kids[i]);
        }
        discover(kids[i]);
      }
    }
    std::sort(order.begin(), order.end());

    std::unordered_map<std::uint32_t, P> memo;
    const NumCoef one = NumCoef::plain(1.0);
    for (std::uint32_t id : order) {
      std::uint32_t kids[2];
      const std::size_t nk = children(l, g, id, kids);
      const Node& n = g.node(id);
      P p;
      if (auto b = l.bound_.find(id); b != l.bound_.end()) {
        p = ops.atom(b->second, one);
      } else {
        switch (n.kind) {
          case NodeKind::Plain:
            p = ops.constant(NumCoef::plain(n.constant));
            break;
          case NodeKind::Cipher:
            p = ops.constant(NumCoef::cipher(g.cipher_of(id)));
            break;
          case NodeKind::Param:
            p = ops.atom(ParamId{n.key}, one);
            break;
          case NodeKind::BoolVar:
            if (nk != 0) {
              l.pkg_.comparisons.push_back(
                  ComparisonRecord{n.key, ship(l, memo.at(n.lhs)), ship(l, memo.at(n.rhs))});
              l.emitted_comparisons_.insert(n.key);
            }
            p = ops.atom(g.param_of(id), one);
            break;
          case NodeKind::Sqrt:
            if (nk != 0) {
              l.pkg_.sqrts.push_back(SqrtRecord{n.key, ship(l, memo.at(n.lhs))});
              l.emitted_sqrts_.insert(n.key);
            }
            p = ops.atom(g.param_of(id), one);
            break;
          case NodeKind::Add:
            p = ops.add(memo.at(n.lhs), memo.at(n.rhs));
            break;
          case NodeKind::Mul: {
            P* a = &memo.at(n.lhs);
            P* b = &memo.at(n.rhs);
            std::uint32_t a_id = n.lhs;
            std::uint32_t b_id = n.rhs;
            if (a->size() < b->size()) {
              std::swap(a, b);
              std::swap(a_id, b_id);
            }
            if (a->size() * b->size() > l.opts_.bind_product_terms && bindable(*a)) {
              *a = bind(l, g, a_id, *a);
            }
            if (a->size() * b->size() > l.opts_.bind_product_terms && bindable(*b)) {
              *b = bind(l, g, b_id, *b);
            }
            p = ops.mul(*a, *b);
            break;
          }
        }
        const bool shared = uses.at(id) >= 2 && p.size() > l.opts_.bind_shared_terms;
        if ((request_operands.contains(id) || shared) && bindable(p)) {
          p = bind(l, g, id, p);
        }
      }
      memo.emplace(id, std::move(p));
      for (std::size_t i = 0; i < nk; ++i) {
        if (--uses.at(kids[i]) == 0) memo.erase(kids[i]);
      }
    }
    std::vector<P> out;
    out.reserve(targets.size());
    for (const Expr& t : targets) out.push_back(memo.at(t.id()));
    return out;
  }
};

Lowerer::Lowerer(sim::Evaluator& ev, DeferredPackage& pkg, LowerOptions opts)
    : ev_(ev), pkg_(pkg), opts_(opts), ring_(ev) {}

std::vector<ResidualFunction> Lowerer::lower(Graph& g, std::span<const Expr> targets) {
  std::vector<ResidualFunction> out;
  for (const auto& p : Impl::lower_polys(*this, g, targets)) out.push_back(Impl::ship(*this, p));
  return out;
}

std::vector<Value> Lowerer::materialize(Graph& g, std::span<const Expr> targets) {
  auto polys = Impl::lower_polys(*this, g, targets);
  std::vector<Value> out;
  out.reserve(polys.size());
  for (std::size_t i = 0; i < polys.size(); ++i) {
    const auto& p = polys[i];
    if (detail::parameter_free(p)) {
      const NumCoef c = p.empty() ? NumCoef::plain(0.0) : p[0].coef;
      out.push_back(Value::cipher(g.ids().next_leaf(), ring_.ship(c)));
    } else if (Impl::is_bare_atom(p)) {
      out.push_back(Value::of_param(p[0].mono[0]));
    } else {
      const ParamId v = ParamId::make(ParamKind::Value, g.ids().next_value());
      pkg_.values.push_back(ValueRecord{v.index(), Impl::ship(*this, p)});
      bound_[targets[i].id()] = v;
      out.push_back(Value::of_param(v));
    }
  }
  return out;
}

DeferredPackage lower(std::span<const Expr> targets, sim::Evaluator& ev, LowerOptions opts) {
  DeferredPackage pkg;
  if (targets.empty()) return pkg;
  Lowerer l(ev, pkg, opts);
  auto outputs = l.lower(*targets[0].graph(), targets);
  pkg.slots.push_back(Slot{"out", std::move(outputs)});
  return pkg;
}

}  // namespace fheadapt::deferred
