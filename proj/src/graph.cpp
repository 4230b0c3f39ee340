// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>

#include "poly.hpp"

namespace fheadapt::deferred {

std::string to_string(ParamId p) {
  switch (p.kind()) {
    case ParamKind::Bool:
      return "c" + std::to_string(p.index());
    case ParamKind::Sqrt:
      return "s" + std::to_string(p.index());
    case ParamKind::Value:
      return "v" + std::to_string(p.index());
  }
  return "?" + std::to_string(p.raw);
}

const Node& Expr::node() const { return graph_->node(id_); }

namespace {

Graph& graph_of(Expr a, Expr b) {
  if (a.graph() == nullptr || a.graph() != b.graph()) {
    throw InvalidArgument("expressions belong to different graphs");
  }
  return *a.graph();
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::string format_number(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Expr operator+(Expr a, Expr b) { return graph_of(a, b).add(a, b); }
Expr operator-(Expr a, Expr b) { return graph_of(a, b).sub(a, b); }
Expr operator*(Expr a, Expr b) { return graph_of(a, b).mul(a, b); }
Expr operator-(Expr a) { return a.graph()->neg(a); }
Expr operator+(Expr a, double k) { return a + a.graph()->plain(k); }
Expr operator+(double k, Expr a) { return a.graph()->plain(k) + a; }
Expr operator-(Expr a, double k) { return a - a.graph()->plain(k); }
Expr operator-(double k, Expr a) { return a.graph()->plain(k) - a; }
Expr operator*(Expr a, double k) { return a.graph()->plain(k) * a; }
Expr operator*(double k, Expr a) { return a.graph()->plain(k) * a; }

// ---------------------------------------------------------------------------

Graph::Graph(std::shared_ptr<IdSource> ids)
    : ids_(ids ? std::move(ids) : std::make_shared<IdSource>()) {
  table_.assign(1024, 0);
}

void Graph::clear() {
  nodes_.clear();
  table_.assign(1024, 0);
  ciphers_.clear();
  names_.clear();
  comparisons_.clear();
  comparison_index_.clear();
  pair_index_.clear();
}

bool Graph::same_signature(const Node& a, const Node& b) const {
  if (a.kind != b.kind) return false;
  if (a.kind == NodeKind::Cipher) return a.key == b.key;
  if (a.lhs != b.lhs || a.rhs != b.rhs) return false;
  switch (a.kind) {
    case NodeKind::Plain:
      return std::bit_cast<std::uint64_t>(a.constant) ==
             std::bit_cast<std::uint64_t>(b.constant);
    case NodeKind::Sqrt:
    case NodeKind::Add:
    case NodeKind::Mul:
      return true;
    default:
      return a.key == b.key;
  }
}

std::uint64_t Graph::signature_hash(const Node& n) const {
  std::uint64_t h = static_cast<std::uint64_t>(n.kind);
  if (n.kind != NodeKind::Cipher) {
    h = mix(h, n.lhs);
    h = mix(h, n.rhs);
  }
  if (n.kind == NodeKind::Plain) h = mix(h, std::bit_cast<std::uint64_t>(n.constant));
  if (n.kind == NodeKind::Cipher || n.kind == NodeKind::BoolVar ||
      n.kind == NodeKind::Param) {
    h = mix(h, n.key);
  }
  // splitmix64 finalizer; the table masks low bits and probes linearly.
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

void Graph::grow_table() {
  std::vector<std::uint32_t> next(table_.size() * 2, 0);
  const std::size_t mask = next.size() - 1;
  for (std::uint32_t slot : table_) {
    if (slot == 0) continue;
    std::size_t pos = signature_hash(nodes_[slot - 1]) & mask;
    while (next[pos] != 0) pos = (pos + 1) & mask;
    next[pos] = slot;
  }
  table_.swap(next);
}

std::uint32_t Graph::intern(const Node& n) {
  if ((nodes_.size() + 1) * 2 > table_.size()) grow_table();
  const std::size_t mask = table_.size() - 1;
  std::size_t pos = signature_hash(n) & mask;
  while (table_[pos] != 0) {
    const std::uint32_t id = table_[pos] - 1;
    if (same_signature(nodes_[id], n)) return id;
    pos = (pos + 1) & mask;
  }
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(n);
  table_[pos] = id + 1;
  return id;
}

Expr Graph::plain(double k) {
  if (!std::isfinite(k)) throw InvalidArgument("plain constants must be finite");
  Node n;
  n.kind = NodeKind::Plain;
  n.constant = (k == 0.0) ? 0.0 : k;
  return Expr(this, intern(n));
}

Expr Graph::cipher(const sim::Ciphertext& ct, std::string name) {
  Expr e = leaf(Value::cipher(ids_->next_leaf(), ct));
  if (!name.empty()) names_[e.id()] = std::move(name);
  return e;
}

Expr Graph::leaf(const Value& v) {
  if (v.kind == Value::Kind::Param) return param(v.param);
  Node n;
  n.kind = NodeKind::Cipher;
  n.key = v.key;
  const std::size_t before = nodes_.size();
  const std::uint32_t id = intern(n);
  if (nodes_.size() != before) {
    nodes_[id].lhs = static_cast<std::uint32_t>(ciphers_.size());
    ciphers_.push_back(v.ct);
  }
  return Expr(this, id);
}

Expr Graph::param(ParamId p) {
  Node n;
  n.kind = NodeKind::Param;
  n.key = p.raw;
  return Expr(this, intern(n));
}

Expr Graph::add(Expr a, Expr b) {
  if (a.is_plain() && b.is_plain()) return plain(a.plain_value() + b.plain_value());
  if (a.is_plain(0.0)) return b;
  if (b.is_plain(0.0)) return a;
  if (b.is_plain() || (!a.is_plain() && b.id() < a.id())) std::swap(a, b);
  Node n;
  n.kind = NodeKind::Add;
  n.lhs = a.id();
  n.rhs = b.id();
  return Expr(this, intern(n));
}

Expr Graph::mul(Expr a, Expr b) {
  if (a.is_plain() && b.is_plain()) return plain(a.plain_value() * b.plain_value());
  if (b.is_plain()) std::swap(a, b);
  if (a.is_plain()) {
    const double k = a.plain_value();
    if (k == 0.0) return plain(0.0);
    if (k == 1.0) return b;
    const Node& bn = b.node();
    if (bn.kind == NodeKind::Mul && nodes_[bn.lhs].kind == NodeKind::Plain) {
      const double folded = k * nodes_[bn.lhs].constant;
      return mul(plain(folded), Expr(this, bn.rhs));
    }
  } else {
    if (a == b && a.kind() == NodeKind::BoolVar) return a;
    if (b.id() < a.id()) std::swap(a, b);
  }
  Node n;
  n.kind = NodeKind::Mul;
  n.lhs = a.id();
  n.rhs = b.id();
  return Expr(this, intern(n));
}

Expr Graph::neg(Expr a) { return mul(plain(-1.0), a); }

Expr Graph::sub(Expr a, Expr b) { return add(a, neg(b)); }

Expr Graph::greater(Expr a, Expr b) {
  if (a.is_plain() && b.is_plain()) {
    return plain(a.plain_value() > b.plain_value() ? 1.0 : 0.0);
  }
  if (a == b) return plain(0.0);
  const std::uint64_t pair_key = (std::uint64_t{a.id()} << 32) | b.id();
  auto it = pair_index_.find(pair_key);
  ComparisonId id = 0;
  if (it == pair_index_.end()) {
    id = ids_->next_comparison();
    comparison_index_.emplace(id, static_cast<std::uint32_t>(comparisons_.size()));
    comparisons_.push_back(Comparison{id, a, b});
    pair_index_.emplace(pair_key, id);
  } else {
    id = it->second;
  }
  Node n;
  n.kind = NodeKind::BoolVar;
  n.key = id;
  // Keep the operands reachable from the node for topological walks.
  n.lhs = a.id();
  n.rhs = b.id();
  return Expr(this, intern(n));
}

Expr Graph::sqrt(Expr a) {
  if (a.is_plain()) {
    const double v = a.plain_value();
    if (v < 0.0) throw InvalidArgument("sqrt of a negative public constant");
    return plain(std::sqrt(v));
  }
  Node n;
  n.kind = NodeKind::Sqrt;
  n.lhs = a.id();
  const std::size_t before = nodes_.size();
  const std::uint32_t id = intern(n);
  if (nodes_.size() != before) nodes_[id].key = ids_->next_sqrt();
  return Expr(this, id);
}

const sim::Ciphertext& Graph::cipher_of(std::uint32_t id) const {
  return ciphers_[nodes_[id].lhs];
}

const std::string& Graph::name_of(std::uint32_t id) const {
  static const std::string kEmpty;
  auto it = names_.find(id);
  return it == names_.end() ? kEmpty : it->second;
}

const Comparison& Graph::comparison(ComparisonId id) const {
  auto it = comparison_index_.find(id);
  if (it == comparison_index_.end()) {
    throw InvalidArgument("unknown comparison id " + std::to_string(id));
  }
  return comparisons_[it->second];
}

ParamId Graph::param_of(std::uint32_t id) const {
  const Node& n = nodes_[id];
  switch (n.kind) {
    case NodeKind::BoolVar:
      return ParamId::make(ParamKind::Bool, n.key);
    case NodeKind::Sqrt:
      return ParamId::make(ParamKind::Sqrt, n.key);
    case NodeKind::Param:
      return ParamId{n.key};
    default:
      throw InvalidArgument("node carries no parameter");
  }
}

// ---------------------------------------------------------------------------

Expr compare(Expr a, Expr b) { return graph_of(a, b).greater(a, b); }

Expr greater_equal(Expr a, Expr b) { return 1.0 - compare(b, a); }

Expr select(Expr cond, Expr then, Expr else_) {
  if (cond.is_plain(1.0)) return then;
  if (cond.is_plain(0.0)) return else_;
  if (then == else_) return then;
  return cond * (then - else_) + else_;
}

Expr sqrt_deferred(Expr arg) { return arg.graph()->sqrt(arg); }

namespace {

template <class Op>
Expr reduce_balanced(std::span<const Expr> xs, Op op) {
  if (xs.size() == 1) return xs[0];
  const std::size_t half = xs.size() / 2;
  return op(reduce_balanced(xs.first(half), op), reduce_balanced(xs.subspan(half), op));
}

}  // namespace

Expr sum(Graph& g, std::span<const Expr> terms) {
  if (terms.empty()) return g.plain(0.0);
  return reduce_balanced(terms, [](Expr a, Expr b) { return a + b; });
}

Expr product(Graph& g, std::span<const Expr> factors) {
  if (factors.empty()) return g.plain(1.0);
  return reduce_balanced(factors, [](Expr a, Expr b) { return a * b; });
}

// ---------------------------------------------------------------------------

Rational rational_div(Expr num, Expr den, DenSign den_sign) {
  graph_of(num, den);
  return Rational{num, den, den_sign};
}

Rational as_rational(Expr e) {
  return Rational{e, e.graph()->plain(1.0), DenSign::Positive};
}

namespace {

Expr boolean_xor(Expr a, Expr b) {
  if (a.is_plain(0.0)) return b;
  if (a.is_plain(1.0)) return 1.0 - b;
  return a + b - 2.0 * (a * b);
}

}  // namespace

Expr rational_less(const Rational& r, const Rational& s, SignPolicy policy) {
  Graph& g = graph_of(r.num, s.num);
  // r.num / r.den < s.num / s.den  <=>  s.num * r.den > r.num * s.den when the
  // product of the denominators is positive, and the reverse otherwise.
  const Expr cross_s = s.num * r.den;
  const Expr cross_r = r.num * s.den;
  bool flipped = (r.den_sign == DenSign::Negative) != (s.den_sign == DenSign::Negative);
  Expr flip = g.plain(flipped ? 1.0 : 0.0);
  for (const Rational* q : {&r, &s}) {
    if (q->den_sign != DenSign::Unknown) continue;
    if (!policy.resolve_unknown) {
      throw SignUnresolvable("denominator sign unknown and resolution disabled");
    }
    flip = boolean_xor(flip, 1.0 - compare(q->den, g.plain(0.0)));
  }
  if (flip.is_plain(0.0)) return compare(cross_s, cross_r);
  if (flip.is_plain(1.0)) return compare(cross_r, cross_s);
  const Expr when_positive = compare(cross_s, cross_r);
  return select(flip, compare(cross_r, cross_s), when_positive);
}

Expr rational_less(const Rational& r, Expr s, SignPolicy policy) {
  return rational_less(r, as_rational(s), policy);
}

Expr rational_less_equal(const Rational& r, const Rational& s, SignPolicy policy) {
  return 1.0 - rational_less(s, r, policy);
}

// ---------------------------------------------------------------------------

namespace {

struct ExprRing {
  using Coef = Expr;
  Graph* g;
  Expr add(const Expr& a, const Expr& b) const { return g->add(a, b); }
  Expr mul(const Expr& a, const Expr& b) const { return g->mul(a, b); }
  bool is_zero(const Expr& c) const { return c.is_plain(0.0); }
};

std::vector<std::uint32_t> arithmetic_cone(const Graph& g, std::uint32_t root) {
  std::vector<std::uint8_t> mark(root + 1, 0);
  std::vector<std::uint32_t> stack{root};
  mark[root] = 1;
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    const Node& n = g.node(id);
    if (n.kind != NodeKind::Add && n.kind != NodeKind::Mul) continue;
    for (std::uint32_t c : {n.lhs, n.rhs}) {
      if (!mark[c]) {
        mark[c] = 1;
        stack.push_back(c);
      }
    }
  }
  std::vector<std::uint32_t> order;
  for (std::uint32_t i = 0; i <= root; ++i) {
    if (mark[i]) order.push_back(i);
  }
  return order;
}

bool dump_order(const NormalTerm& a, const NormalTerm& b) {
  if (a.monomial.empty() != b.monomial.empty()) return b.monomial.empty();
  return std::lexicographical_compare(a.monomial.begin(), a.monomial.end(),
                                      b.monomial.begin(), b.monomial.end());
}

}  // namespace

NormalForm normal_form(Expr e) {
  Graph& g = *e.graph();
  ExprRing ring{&g};
  detail::PolyOps<ExprRing> ops(ring);
  using P = detail::Poly<Expr>;
  std::unordered_map<std::uint32_t, P> memo;
  const Expr one = g.plain(1.0);
  for (std::uint32_t id : arithmetic_cone(g, e.id())) {
    const Node& n = g.node(id);
    P p;
    switch (n.kind) {
      case NodeKind::Cipher:
      case NodeKind::Plain:
        p = ops.constant(g.expr(id));
        break;
      case NodeKind::BoolVar:
      case NodeKind::Sqrt:
      case NodeKind::Param:
        p = ops.atom(g.param_of(id), one);
        break;
      case NodeKind::Add:
        p = ops.add(memo.at(n.lhs), memo.at(n.rhs));
        break;
      case NodeKind::Mul:
        p = ops.mul(memo.at(n.lhs), memo.at(n.rhs));
        break;
    }
    memo.emplace(id, std::move(p));
  }
  NormalForm nf;
  for (auto& t : memo.at(e.id())) {
    nf.terms.push_back(NormalTerm{{t.mono.begin(), t.mono.end()}, t.coef});
  }
  std::stable_sort(nf.terms.begin(), nf.terms.end(), dump_order);
  return nf;
}

Expr rebuild(Graph& g, const NormalForm& nf) {
  std::unordered_map<std::uint64_t, std::uint32_t> sqrt_nodes;
  for (std::uint32_t i = 0; i < g.size(); ++i) {
    if (g.node(i).kind == NodeKind::Sqrt) sqrt_nodes.emplace(g.node(i).key, i);
  }
  std::vector<Expr> terms;
  for (const auto& t : nf.terms) {
    std::vector<Expr> factors;
    for (ParamId p : t.monomial) {
      switch (p.kind()) {
        case ParamKind::Bool: {
          const Comparison& c = g.comparison(p.index());
          factors.push_back(g.greater(c.lhs, c.rhs));
          break;
        }
        case ParamKind::Sqrt:
          factors.push_back(g.expr(sqrt_nodes.at(p.index())));
          break;
        case ParamKind::Value:
          factors.push_back(g.param(p));
          break;
      }
    }
    terms.push_back(t.coefficient * product(g, factors));
  }
  return sum(g, terms);
}

Expr simplify(Expr e) { return rebuild(*e.graph(), normal_form(e)); }

namespace {

void collect_addends(const Graph& g, std::uint32_t id, std::vector<std::uint32_t>& out) {
  const Node& n = g.node(id);
  if (n.kind == NodeKind::Add) {
    collect_addends(g, n.lhs, out);
    collect_addends(g, n.rhs, out);
  } else {
    out.push_back(id);
  }
}

std::string render_node(Graph& g, std::uint32_t id, bool parenthesize_sums);

std::string render_factor(Graph& g, std::uint32_t id) {
  return render_node(g, id, true);
}

std::string render_node(Graph& g, std::uint32_t id, bool parenthesize_sums) {
  const Node& n = g.node(id);
  switch (n.kind) {
    case NodeKind::Plain:
      return format_number(n.constant);
    case NodeKind::Cipher: {
      const std::string& name = g.name_of(id);
      return name.empty() ? "ct" + std::to_string(n.key) : name;
    }
    case NodeKind::BoolVar:
    case NodeKind::Sqrt:
    case NodeKind::Param:
      return to_string(g.param_of(id));
    case NodeKind::Mul:
      if (g.node(n.lhs).kind == NodeKind::Plain) {
        return format_number(g.node(n.lhs).constant) + "*" + render_factor(g, n.rhs);
      }
      return render_factor(g, n.lhs) + "*" + render_factor(g, n.rhs);
    case NodeKind::Add: {
      std::vector<std::uint32_t> addends;
      collect_addends(g, id, addends);
      std::string out;
      for (std::size_t i = 0; i < addends.size(); ++i) {
        const Node& a = g.node(addends[i]);
        const bool negated = a.kind == NodeKind::Mul &&
                             g.node(a.lhs).kind == NodeKind::Plain &&
                             g.node(a.lhs).constant < 0.0;
        std::string body;
        if (negated) {
          const double k = -g.node(a.lhs).constant;
          body = (k == 1.0 ? "" : format_number(k) + "*") + render_factor(g, a.rhs);
        } else {
          body = render_node(g, addends[i], false);
        }
        if (i == 0) {
          out = negated ? "-" + body : body;
        } else {
          out += negated ? " - " : " + ";
          out += body;
        }
      }
      return parenthesize_sums ? "(" + out + ")" : out;
    }
  }
  return "?";
}

}  // namespace

std::string render(Expr e) { return render_node(*e.graph(), e.id(), false); }

std::string dump(const NormalForm& nf) {
  std::string out;
  for (const auto& t : nf.terms) {
    out += "{";
    for (std::size_t i = 0; i < t.monomial.size(); ++i) {
      if (i) out += ",";
      out += to_string(t.monomial[i]);
    }
    out += "}: " + render(t.coefficient) + "\n";
  }
  return out;
}

std::size_t dependency_depth(Graph& g, std::span<const Expr> targets) {
  std::uint32_t top = 0;
  for (const Expr& t : targets) top = std::max(top, t.id());
  if (targets.empty()) return 0;
  std::vector<std::uint32_t> depth(top + 1, 0);
  for (std::uint32_t i = 0; i <= top; ++i) {
    const Node& n = g.node(i);
    switch (n.kind) {
      case NodeKind::Add:
      case NodeKind::Mul:
        depth[i] = std::max(depth[n.lhs], depth[n.rhs]);
        break;
      case NodeKind::BoolVar:
        depth[i] = 1 + std::max(depth[n.lhs], depth[n.rhs]);
        break;
      case NodeKind::Sqrt:
        depth[i] = 1 + depth[n.lhs];
        break;
      default:
        break;
    }
  }
  std::size_t d = 0;
  for (const Expr& t : targets) d = std::max<std::size_t>(d, depth[t.id()]);
  return d;
}

}  // namespace fheadapt::deferred
