// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Sparse polynomials over residual parameters, generic in the coefficient
// ring. Used for the symbolic normal form (Expr coefficients) and for
// lowering (evaluated ciphertext coefficients).

#ifndef FHEADAPT_SRC_POLY_HPP_
#define FHEADAPT_SRC_POLY_HPP_

#include <algorithm>
#include <boost/container/small_vector.hpp>
#include <utility>
#include <vector>

#include "fheadapt/graph.hpp"

namespace fheadapt::deferred::detail {

using Monomial = boost::container::small_vector<ParamId, 4>;

inline Monomial multiply(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() || j != b.end()) {
    if (j == b.end() || (i != a.end() && *i < *j)) {
      out.push_back(*i++);
    } else if (i == a.end() || *j < *i) {
      out.push_back(*j++);
    } else {
      // Same parameter on both sides: booleans are idempotent.
      out.push_back(*i);
      if (!i->idempotent()) out.push_back(*j);
      ++i;
      ++j;
    }
  }
  return out;
}

inline bool mono_less(const Monomial& a, const Monomial& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

template <class Coef>
struct Term {
  Monomial mono;
  Coef coef;
};

template <class Coef>
using Poly = std::vector<Term<Coef>>;

template <class Coef>
bool parameter_free(const Poly<Coef>& p) {
  return std::all_of(p.begin(), p.end(),
                     [](const Term<Coef>& t) { return t.mono.empty(); });
}

// Ring must provide: Coef add(a, b), Coef mul(a, b), bool is_zero(c).
template <class Ring>
class PolyOps {
 public:
  using Coef = typename Ring::Coef;
  using P = Poly<Coef>;

  explicit PolyOps(Ring& ring) : ring_(ring) {}

  P constant(const Coef& c) const {
    if (ring_.is_zero(c)) return {};
    return P{Term<Coef>{{}, c}};
  }

  P atom(ParamId p, const Coef& one) const {
    Monomial m;
    m.push_back(p);
    return P{Term<Coef>{std::move(m), one}};
  }

  P add(const P& a, const P& b) const {
    P out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      if (j == b.size() || (i < a.size() && mono_less(a[i].mono, b[j].mono))) {
        out.push_back(a[i++]);
      } else if (i == a.size() || mono_less(b[j].mono, a[i].mono)) {
        out.push_back(b[j++]);
      } else {
        Coef c = ring_.add(a[i].coef, b[j].coef);
        if (!ring_.is_zero(c)) out.push_back(Term<Coef>{a[i].mono, std::move(c)});
        ++i;
        ++j;
      }
    }
    return out;
  }

  P mul(const P& a, const P& b) const {
    P raw;
    raw.reserve(a.size() * b.size());
    for (const auto& x : a) {
      for (const auto& y : b) {
        Coef c = ring_.mul(x.coef, y.coef);
        if (ring_.is_zero(c)) continue;
        raw.push_back(Term<Coef>{multiply(x.mono, y.mono), std::move(c)});
      }
    }
    return normalize(std::move(raw));
  }

  // Sorts and merges equal monomials, keeping the original order of
  // coefficient additions so results are reproducible.
  P normalize(P raw) const {
    std::stable_sort(raw.begin(), raw.end(),
                     [](const Term<Coef>& x, const Term<Coef>& y) {
                       return mono_less(x.mono, y.mono);
                     });
    P out;
    out.reserve(raw.size());
    for (auto& t : raw) {
      if (!out.empty() && out.back().mono == t.mono) {
        out.back().coef = ring_.add(out.back().coef, t.coef);
      } else {
        out.push_back(std::move(t));
      }
    }
    std::erase_if(out, [this](const Term<Coef>& t) { return ring_.is_zero(t.coef); });
    return out;
  }

 private:
  Ring& ring_;
};

}  // namespace fheadapt::deferred::detail

#endif  // FHEADAPT_SRC_POLY_HPP_
