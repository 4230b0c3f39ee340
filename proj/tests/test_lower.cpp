// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fheadapt/errors.hpp"
#include "fheadapt/lower.hpp"
#include "fheadapt/protocol.hpp"
#include "support.hpp"

using namespace fheadapt;
using namespace fheadapt::deferred;

namespace {

std::string golden(const std::string& name) {
  std::ifstream in(std::string(FHEADAPT_GOLDEN_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Example {
  sim::Evaluator ev{sim::SimParams{}};
  Graph g;
  Expr out;
  Example() {
    auto var = [&](const char* name, double x) { return g.cipher(ev.encrypt(x), name); };
    const Expr x = var("x", 3), y = var("y", 1), z = var("z", 2), w = var("w", 5);
    const Expr c = var("c", 10), d = var("d", 20), e = var("e", 30);
    out = compare(x, y) * c + compare(z, w) * d + greater_equal(y, x) * e;
  }
};

ParamId boolean(std::uint64_t i) { return ParamId::make(ParamKind::Bool, i); }

}  // namespace

TEST_CASE("worked example lowers to the golden package") {
  Example ex;
  const DeferredPackage pkg = lower(std::span<const Expr>(&ex.out, 1), ex.ev);
  CHECK(pkg.comparisons.size() == 2);
  CHECK(pkg.sqrts.empty());
  REQUIRE(pkg.slots.size() == 1);
  CHECK(pkg.slots[0].group == "out");
  CHECK(protocol::dump_package(pkg) == golden("deferred_example_package.txt"));
}

TEST_CASE("residual evaluates correctly under every assignment") {
  Example ex;
  const DeferredPackage pkg = lower(std::span<const Expr>(&ex.out, 1), ex.ev);
  const ResidualFunction& f = pkg.slots[0].outputs[0];
  CHECK(f.params() == std::vector<ParamId>{boolean(1), boolean(2)});
  for (int c1 = 0; c1 <= 1; ++c1) {
    for (int c2 = 0; c2 <= 1; ++c2) {
      const Assignment a{{boolean(1).raw, c1}, {boolean(2).raw, c2}};
      CHECK(evaluate_residual(f, a) == c1 * (10.0 - 30.0) + c2 * 20.0 + 30.0);
    }
  }
  const Assignment partial{{boolean(1).raw, 1.0}};
  CHECK_THROWS_AS(evaluate_residual(f, partial), MissingAssignment);

  PackageResolver client(pkg);
  CHECK(client.evaluate(f) == 10.0);
}

TEST_CASE("pure arithmetic lowers without requests") {
  sim::Evaluator ev(sim::SimParams{});
  Graph g;
  const Expr x = g.cipher(ev.encrypt(1.5)), y = g.cipher(ev.encrypt(-2));
  const Expr out = x * y + 3.0;
  const DeferredPackage pkg = lower(std::span<const Expr>(&out, 1), ev);
  CHECK(pkg.comparisons.empty());
  CHECK(pkg.values.empty());
  const ResidualFunction& f = pkg.slots[0].outputs[0];
  REQUIRE(f.size() == 1);
  CHECK(f.monomial(0).empty());
  CHECK(evaluate_residual(f, Assignment{}) == 0.0);
  CHECK(pkg.leakage().parameters == 0);
}

TEST_CASE("every parameter is defined by a record") {
  sim::Evaluator ev(sim::SimParams{});
  Graph g;
  std::vector<Expr> xs;
  for (double v : {0.3, 0.9, 0.1, 0.7, 0.5}) xs.push_back(g.cipher(ev.encrypt(v)));
  Expr m = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) m = select(compare(xs[i], m), xs[i], m);
  const Expr root = sqrt_deferred(m * m + 1.0);
  const DeferredPackage pkg = lower(std::span<const Expr>(&root, 1), ev);
  CHECK(pkg.comparisons.size() == 4);
  CHECK(pkg.sqrts.size() == 1);

  std::set<std::uint64_t> defined;
  for (const auto& v : pkg.values) defined.insert(ParamId::make(ParamKind::Value, v.id).raw);
  for (const auto& c : pkg.comparisons) defined.insert(boolean(c.id).raw);
  for (const auto& r : pkg.sqrts) defined.insert(ParamId::make(ParamKind::Sqrt, r.id).raw);
  auto closed = [&](const ResidualFunction& f) {
    for (ParamId p : f.params()) {
      if (!defined.contains(p.raw)) return false;
    }
    return true;
  };
  for (const auto& v : pkg.values) CHECK(closed(v.body));
  for (const auto& c : pkg.comparisons) CHECK((closed(c.lhs) && closed(c.rhs)));
  for (const auto& r : pkg.sqrts) CHECK(closed(r.arg));
  CHECK(closed(pkg.slots[0].outputs[0]));
  PackageResolver client(pkg);
  CHECK(client.evaluate(pkg.slots[0].outputs[0]) == doctest::Approx(std::sqrt(0.81 + 1.0)));
}

TEST_CASE("binding thresholds trade monomials for value parameters") {
  auto run = [](LowerOptions opts) {
    sim::Evaluator ev(sim::SimParams{});
    Graph g;
    std::vector<Expr> a, b;
    for (int i = 0; i < 6; ++i) a.push_back(g.cipher(ev.encrypt(0.1 * i)));
    for (int i = 0; i < 6; ++i) b.push_back(g.cipher(ev.encrypt(1.0 - 0.15 * i)));
    Expr p = g.plain(0.0), q = g.plain(0.0);
    for (int i = 0; i + 1 < 6; ++i) {
      p = p + select(compare(a[i], a[i + 1]), a[i], b[i]);
      q = q + select(compare(b[i + 1], b[i]), b[i], a[i]);
    }
    const Expr out = p * q;
    testing::PlainEval eval(g);
    const double want = eval(out);
    DeferredPackage pkg = lower(std::span<const Expr>(&out, 1), ev, opts);
    PackageResolver client(pkg);
    CHECK(client.evaluate(pkg.slots[0].outputs[0]) == doctest::Approx(want).epsilon(1e-12));
    return pkg;
  };
  LowerOptions eager;
  eager.bind_product_terms = 0;
  LowerOptions lazy;
  lazy.bind_product_terms = 1u << 20;
  lazy.bind_shared_terms = 1u << 20;
  const DeferredPackage bound = run(eager);
  const DeferredPackage expanded = run(lazy);
  CHECK(!bound.values.empty());
  CHECK(expanded.values.empty());
  CHECK(bound.slots[0].outputs[0].size() < expanded.slots[0].outputs[0].size());
}

TEST_CASE("leakage sums monomials and distinct parameters") {
  Example ex;
  const DeferredPackage pkg = lower(std::span<const Expr>(&ex.out, 1), ex.ev);
  const LeakageMetric slot = leakage(pkg.slots[0].outputs[0]);
  CHECK(slot.monomials == 3);
  CHECK(slot.parameters == 2);
  std::size_t monomials = 0, params = 0;
  for (const auto& c : pkg.comparisons) {
    monomials += c.lhs.size() + c.rhs.size();
    params += c.lhs.params().size() + c.rhs.params().size();
  }
  CHECK(pkg.leakage().monomials == monomials + 3);
  CHECK(pkg.leakage().parameters == params + 2);
}

TEST_CASE("interactive evaluator needs every outcome first") {
  sim::Evaluator ev(sim::SimParams{});
  Graph g;
  const Expr x = g.cipher(ev.encrypt(4)), y = g.cipher(ev.encrypt(7));
  const Expr c = compare(x, y);
  const Expr m = select(c, x, y);
  CipherEvaluator eval(g, ev);
  CHECK_THROWS_AS(eval.eval(m), Error);
  const ParamId p = g.param_of(c.id());
  eval.resolve(p, ev.encrypt(0.0));
  CHECK(eval.resolved(p));
  const sim::Ciphertext out = eval.eval_cipher(m);
  CHECK(out.value == 7.0);
  CHECK(out.level == sim::SimParams{}.depth_budget - 1);
}
