// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/residual.hpp"

#include <algorithm>
#include <cmath>

namespace fheadapt::deferred {

void ResidualFunction::add_term(std::span<const ParamId> monomial,
                                const sim::Ciphertext& coef) {
  factors_.insert(factors_.end(), monomial.begin(), monomial.end());
  offsets_.push_back(static_cast<std::uint32_t>(factors_.size()));
  coefficients_.push_back(coef);
}

std::vector<ParamId> ResidualFunction::params() const {
  std::vector<ParamId> out(factors_);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ParamId> ResidualFunction::params(ParamKind kind) const {
  std::vector<ParamId> out = params();
  std::erase_if(out, [kind](ParamId p) { return p.kind() != kind; });
  return out;
}

double evaluate_residual(const ResidualFunction& f, const Resolver& resolve,
                         const sim::Decryptor& dec) {
  double total = 0.0;
  for (std::size_t t = 0; t < f.size(); ++t) {
    double term = dec.decrypt(f.coefficient(t));
    for (ParamId p : f.monomial(t)) term *= resolve(p);
    total += term;
  }
  return total;
}

double evaluate_residual(const ResidualFunction& f, const Assignment& assignment,
                         const sim::Decryptor& dec) {
  return evaluate_residual(
      f,
      [&assignment](ParamId p) {
        auto it = assignment.find(p.raw);
        if (it == assignment.end()) {
          throw MissingAssignment("no value assigned to parameter " + to_string(p));
        }
        return it->second;
      },
      dec);
}

LeakageMetric leakage(const ResidualFunction& f) {
  return LeakageMetric{f.size(), f.params().size()};
}

LeakageMetric DeferredPackage::leakage() const {
  LeakageMetric m;
  for (const auto& c : comparisons) {
    m += deferred::leakage(c.lhs);
    m += deferred::leakage(c.rhs);
  }
  for (const auto& s : sqrts) m += deferred::leakage(s.arg);
  for (const auto& v : values) m += deferred::leakage(v.body);
  for (const auto& slot : slots) {
    for (const auto& f : slot.outputs) m += deferred::leakage(f);
  }
  return m;
}

PackageResolver::PackageResolver(const DeferredPackage& pkg, sim::Decryptor dec)
    : pkg_(pkg), dec_(dec) {
  for (std::size_t i = 0; i < pkg.comparisons.size(); ++i) {
    comparison_index_.emplace(pkg.comparisons[i].id, i);
  }
  for (std::size_t i = 0; i < pkg.sqrts.size(); ++i) sqrt_index_.emplace(pkg.sqrts[i].id, i);
  for (std::size_t i = 0; i < pkg.values.size(); ++i) {
    value_index_.emplace(pkg.values[i].id, i);
  }
}

double PackageResolver::evaluate(const ResidualFunction& f) {
  return evaluate_residual(f, [this](ParamId p) { return resolve(p); }, dec_);
}

double PackageResolver::resolve(ParamId p) {
  if (auto it = resolved_.find(p.raw); it != resolved_.end()) return it->second;
  auto lookup = [&p](const auto& index) {
    auto it = index.find(p.index());
    if (it == index.end()) {
      throw MissingAssignment("package defines no parameter " + to_string(p));
    }
    return it->second;
  };
  double v = 0.0;
  switch (p.kind()) {
    case ParamKind::Bool: {
      const auto& rec = pkg_.comparisons[lookup(comparison_index_)];
      v = evaluate(rec.lhs) > evaluate(rec.rhs) ? 1.0 : 0.0;
      break;
    }
    case ParamKind::Sqrt: {
      // Approximate arithmetic can push a true zero slightly negative.
      v = std::sqrt(std::max(0.0, evaluate(pkg_.sqrts[lookup(sqrt_index_)].arg)));
      break;
    }
    case ParamKind::Value:
      v = evaluate(pkg_.values[lookup(value_index_)].body);
      break;
  }
  resolved_.emplace(p.raw, v);
  return v;
}

void PackageResolver::resolve_all() {
  for (const auto& c : pkg_.comparisons) resolve(ParamId::make(ParamKind::Bool, c.id));
  for (const auto& s : pkg_.sqrts) resolve(ParamId::make(ParamKind::Sqrt, s.id));
  for (const auto& v : pkg_.values) resolve(ParamId::make(ParamKind::Value, v.id));
}

}  // namespace fheadapt::deferred
