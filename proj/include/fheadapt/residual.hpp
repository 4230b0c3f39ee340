// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// What the server ships in deferred mode: polynomials in comparison outcomes,
// square roots and bound values, with ciphertext coefficients, plus the
// requests that define each parameter. The client resolves parameters and
// substitutes them.

#ifndef FHEADAPT_RESIDUAL_HPP_
#define FHEADAPT_RESIDUAL_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fheadapt/graph.hpp"
#include "fheadapt/sim.hpp"

namespace fheadapt::deferred {

// Sum over terms of coefficient * product of parameters. Monomials are stored
// flat: term t owns factors[offsets[t] .. offsets[t + 1]).
class ResidualFunction {
 public:
  ResidualFunction() = default;

  void add_term(std::span<const ParamId> monomial, const sim::Ciphertext& coef);

  std::size_t size() const { return coefficients_.size(); }
  bool empty() const { return coefficients_.empty(); }
  std::span<const ParamId> monomial(std::size_t t) const {
    return {factors_.data() + offsets_[t], offsets_[t + 1] - offsets_[t]};
  }
  const sim::Ciphertext& coefficient(std::size_t t) const { return coefficients_[t]; }
  std::size_t factor_count() const { return factors_.size(); }

  // Distinct parameters in ascending order.
  std::vector<ParamId> params() const;
  std::vector<ParamId> params(ParamKind kind) const;

 private:
  std::vector<std::uint32_t> offsets_{0};
  std::vector<ParamId> factors_;
  std::vector<sim::Ciphertext> coefficients_;
};

using Assignment = std::unordered_map<std::uint64_t, double>;  // keyed by ParamId::raw
using Resolver = std::function<double(ParamId)>;

// Throws MissingAssignment naming the first unassigned parameter.
double evaluate_residual(const ResidualFunction& f, const Assignment& assignment,
                         const sim::Decryptor& dec = {});
double evaluate_residual(const ResidualFunction& f, const Resolver& resolve,
                         const sim::Decryptor& dec = {});

struct ComparisonRecord {
  ComparisonId id = 0;
  ResidualFunction lhs;
  ResidualFunction rhs;
};

struct SqrtRecord {
  std::uint64_t id = 0;
  ResidualFunction arg;
};

// A quantity the server chose to name instead of expanding it into every
// polynomial that uses it.
struct ValueRecord {
  std::uint64_t id = 0;
  ResidualFunction body;
};

struct LeakageMetric {
  std::size_t monomials = 0;
  std::size_t parameters = 0;

  LeakageMetric& operator+=(const LeakageMetric& o) {
    monomials += o.monomials;
    parameters += o.parameters;
    return *this;
  }
};

LeakageMetric leakage(const ResidualFunction& f);

struct Slot {
  std::string group;
  std::vector<ResidualFunction> outputs;
};

// One-round payload. Records are listed in dependency order: every
// parameter used by a record is defined by an earlier record.
struct DeferredPackage {
  std::vector<ComparisonRecord> comparisons;
  std::vector<SqrtRecord> sqrts;
  std::vector<ValueRecord> values;
  std::vector<Slot> slots;

  LeakageMetric leakage() const;
};

// Client side: resolves every parameter of a package on first use.
class PackageResolver {
 public:
  explicit PackageResolver(const DeferredPackage& pkg, sim::Decryptor dec = {});

  double resolve(ParamId p);
  double evaluate(const ResidualFunction& f);
  // Resolves every request, including ones no slot depends on, so the work
  // done does not reveal which requests were decoys.
  void resolve_all();

 private:
  const DeferredPackage& pkg_;
  sim::Decryptor dec_;
  std::unordered_map<std::uint64_t, std::size_t> comparison_index_;
  std::unordered_map<std::uint64_t, std::size_t> sqrt_index_;
  std::unordered_map<std::uint64_t, std::size_t> value_index_;
  Assignment resolved_;
};

}  // namespace fheadapt::deferred

#endif  // FHEADAPT_RESIDUAL_HPP_
