// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fheadapt/errors.hpp"
#include "fheadapt/kernels.hpp"
#include "support.hpp"

using namespace fheadapt;
using namespace fheadapt::kernels;

namespace {

struct Fixture {
  sim::Evaluator ev{sim::SimParams{}};
  Graph g;
  testing::PlainEval eval{g};
  Expr var(double x) { return g.cipher(ev.encrypt(x)); }
  std::vector<Expr> vars(const std::vector<double>& xs) {
    std::vector<Expr> out;
    for (double x : xs) out.push_back(var(x));
    return out;
  }
};

// Depth in ciphertext-ciphertext products.
int mul_depth(Graph& g, Expr e) {
  std::vector<int> d(e.id() + 1, 0);
  for (std::uint32_t i = 0; i <= e.id(); ++i) {
    const deferred::Node& n = g.node(i);
    switch (n.kind) {
      case deferred::NodeKind::Add:
        d[i] = std::max(d[n.lhs], d[n.rhs]);
        break;
      case deferred::NodeKind::Mul:
        d[i] = std::max(d[n.lhs], d[n.rhs]);
        if (g.node(n.lhs).kind != deferred::NodeKind::Plain) ++d[i];
        break;
      default:
        break;
    }
  }
  return d[e.id()];
}

}  // namespace

TEST_CASE("max2 picks the larger operand") {
  Fixture f;
  CHECK(f.eval(max2(f.var(3), f.var(5))) == 5.0);
  CHECK(f.eval(max2(f.var(-1), f.var(-4))) == -1.0);
  CHECK(f.eval(max2(f.var(2), f.var(2))) == 2.0);
}

TEST_CASE("max family on random arrays") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (std::size_t n : {1, 2, 3, 5, 8, 13, 32}) {
    for (int trial = 0; trial < 20; ++trial) {
      Fixture f;
      std::vector<double> xs(n);
      for (double& x : xs) x = u(rng);
      const auto ls = f.vars(xs);
      const double want = *std::max_element(xs.begin(), xs.end());
      // b + (a - b) may be one ulp away from a.
      CHECK(f.eval(vec_max(ls)) == doctest::Approx(want).epsilon(1e-14));
      CHECK(f.eval(running_max(ls)) == doctest::Approx(want).epsilon(1e-14));
    }
  }
}

TEST_CASE("vec_max is logarithmic in depth, running_max linear") {
  for (std::size_t n : {2, 4, 8, 16, 64}) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = double((i * 7) % n);
    Fixture h;
    const auto vs = h.vars(xs);
    CHECK(mul_depth(h.g, vec_max(vs)) == int(std::ceil(std::log2(double(n)))));
    CHECK(mul_depth(h.g, running_max(vs)) == int(n));
  }
}

TEST_CASE("empty inputs are rejected") {
  std::vector<Expr> none;
  CHECK_THROWS_AS(vec_max(none), EmptyInput);
  CHECK_THROWS_AS(running_max(none), EmptyInput);
  CHECK_THROWS_AS(vec_argmax_onehot(none), EmptyInput);
}

TEST_CASE("argmax one-hot") {
  Fixture f;
  const auto tie = vec_argmax_onehot(f.vars({4, 4}));
  CHECK(f.eval(tie.onehot.mask[0]) == 1.0);
  CHECK(f.eval(tie.onehot.mask[1]) == 0.0);

  const auto single = vec_argmax_onehot(f.vars({-2}));
  CHECK(f.eval(single.max) == -2.0);
  CHECK(f.eval(single.onehot.mask[0]) == 1.0);

  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> small(0, 5);
  for (int trial = 0; trial < 300; ++trial) {
    Fixture h;
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> xs(n);
    for (double& x : xs) x = small(rng);
    const auto am = vec_argmax_onehot(h.vars(xs));
    const std::size_t want = std::size_t(std::max_element(xs.begin(), xs.end()) - xs.begin());
    REQUIRE(am.onehot.mask.size() == n);
    CHECK(h.eval(am.max) == doctest::Approx(xs[want]).epsilon(1e-14));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = h.eval(am.onehot.mask[i]);
      CHECK(m == (i == want ? 1.0 : 0.0));
      total += m;
    }
    CHECK(total == 1.0);
  }
}

TEST_CASE("angle bins without division") {
  const HistogramSpec spec = HistogramSpec::uniform(8);
  auto bin_of = [&](double dx, double dy) {
    Fixture f;
    const Gradient grad{f.var(dx), f.var(dy), f.var(1)};
    int hit = -1, hits = 0;
    for (std::size_t i = 0; i < spec.num_bins(); ++i) {
      if (f.eval(bin_mask(grad, spec, i)) == 1.0) {
        hit = int(i);
        ++hits;
      }
    }
    CHECK(hits == 1);
    return hit;
  };
  CHECK(bin_of(2, 1) == 0);
  CHECK(bin_of(0, 1) == 2);
  CHECK(bin_of(-1, 0) == 4);
  CHECK(bin_of(1, 0) == 0);
  CHECK(bin_of(0, -1) == 6);
  CHECK(bin_of(1, -0.01) == 7);

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 2000; ++i) {
    const double dx = u(rng), dy = u(rng);
    double angle = std::atan2(dy, dx);
    if (angle < 0) angle += 2 * std::numbers::pi;
    const double width = 2 * std::numbers::pi / 8;
    const double pos = angle / width;
    if (std::abs(pos - std::round(pos)) < 1e-9) continue;
    CHECK(bin_of(dx, dy) == int(std::floor(pos)) % 8);
  }
}

TEST_CASE("tangent form agrees in the right half-plane") {
  const HistogramSpec spec = HistogramSpec::uniform(8);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 500; ++i) {
    Fixture f;
    const double dx = std::abs(u(rng)) + 1e-3, dy = u(rng);
    const Gradient grad{f.var(dx), f.var(dy), f.var(1)};
    for (std::size_t b = 0; b < spec.num_bins(); ++b) {
      const double expect = f.eval(bin_mask(grad, spec, b));
      const double got = f.eval(bin_mask_tan(grad, spec, b));
      const double pos = std::atan2(dy, dx) / (2 * std::numbers::pi / 8);
      if (std::abs(pos - std::round(pos)) < 1e-9) continue;
      CHECK(got == expect);
    }
  }
}

TEST_CASE("histogram specs are validated") {
  CHECK_THROWS_AS(HistogramSpec::uniform(2), InvalidArgument);
  HistogramSpec bad = HistogramSpec::uniform(4);
  bad.boundaries[2] = bad.boundaries[1];
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_NOTHROW(HistogramSpec::uniform(36).validate());
}

TEST_CASE("weighted histogram") {
  const HistogramSpec spec = HistogramSpec::uniform(8);
  Fixture f;
  SUBCASE("single gradient") {
    const Gradient grad{f.var(0), f.var(2), f.var(2.5)};
    const auto h = weighted_histogram(f.g, std::span<const Gradient>(&grad, 1), spec);
    REQUIRE(h.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(f.eval(h[i]) == (i == 2 ? 2.5 : 0.0));
  }
  SUBCASE("empty window") {
    const auto h = weighted_histogram(f.g, {}, spec);
    REQUIRE(h.size() == 8);
    for (const Expr& e : h) CHECK(e.is_plain(0.0));
  }
  SUBCASE("random window against a plain histogram") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2, 2);
    std::vector<Gradient> grads;
    std::vector<double> want(8, 0.0);
    for (int i = 0; i < 49; ++i) {
      const double dx = u(rng), dy = u(rng), w = std::abs(u(rng));
      grads.push_back({f.var(dx), f.var(dy), f.var(w)});
      double a = std::atan2(dy, dx);
      if (a < 0) a += 2 * std::numbers::pi;
      want[std::size_t(a / (2 * std::numbers::pi / 8)) % 8] += w;
    }
    const auto h = weighted_histogram(f.g, grads, spec);
    for (std::size_t i = 0; i < 8; ++i) CHECK(f.eval(h[i]) == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("convolution") {
  Fixture f;
  const int w = 7, h = 5;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  Grid<double> plain(w, h);
  Grid<Expr> img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      plain.at(x, y) = u(rng);
      img.at(x, y) = f.var(plain.at(x, y));
    }
  }
  auto reference = [&](const Kernel2d& k) {
    Grid<double> out(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int j = 0; j < k.height; ++j) {
          for (int i = 0; i < k.width; ++i) {
            s += k.at(i, j) * plain.clamped(x + i - k.width / 2, y + j - k.height / 2);
          }
        }
        out.at(x, y) = s;
      }
    }
    return out;
  };
  auto check_against = [&](const Grid<Expr>& got, const Grid<double>& want) {
    REQUIRE(got.width == w);
    REQUIRE(got.height == h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) CHECK(f.eval(got.at(x, y)) == doctest::Approx(want.at(x, y)).epsilon(1e-12));
    }
  };

  SUBCASE("identity") {
    const Kernel2d id{3, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0}};
    const auto out = convolve2d(img, id);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) CHECK(out.at(x, y) == img.at(x, y));
    }
  }
  SUBCASE("box") {
    const Kernel2d box{3, 3, std::vector<double>(9, 1.0 / 9)};
    check_against(convolve2d(img, box), reference(box));
  }
  SUBCASE("random 5x3") {
    Kernel2d k{5, 3, std::vector<double>(15)};
    for (double& v : k.k) v = u(rng) - 0.5;
    check_against(convolve2d(img, k), reference(k));
  }
  SUBCASE("separable equals the outer-product kernel") {
    const std::vector<double> g = gaussian_kernel(1.2, 2);
    Kernel2d outer{5, 5, std::vector<double>(25)};
    for (int j = 0; j < 5; ++j) {
      for (int i = 0; i < 5; ++i) outer.k[std::size_t(j * 5 + i)] = g[std::size_t(i)] * g[std::size_t(j)];
    }
    check_against(convolve_separable(img, g, g), reference(outer));
  }
  SUBCASE("even kernels are rejected") {
    CHECK_THROWS_AS(convolve2d(img, Kernel2d{2, 3, std::vector<double>(6, 0.0)}), InvalidArgument);
  }
}

TEST_CASE("gaussian kernel") {
  const auto k = gaussian_kernel(1.6, gaussian_radius(1.6));
  CHECK(k.size() == std::size_t(2 * gaussian_radius(1.6) + 1));
  double total = 0.0;
  for (double v : k) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t i = 0; i < k.size(); ++i) CHECK(k[i] == doctest::Approx(k[k.size() - 1 - i]));
  CHECK(gaussian_radius(1.6) == 5);
  CHECK_THROWS_AS(gaussian_kernel(0.0, 2), InvalidArgument);
}

TEST_CASE("kernels issue the same operations for any input values") {
  auto trace = [](std::uint64_t seed) {
    sim::Evaluator ev(sim::SimParams{});
    deferred::Graph g;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Expr> ls;
    for (int i = 0; i < 9; ++i) ls.push_back(g.cipher(ev.encrypt(u(rng))));
    vec_max(ls);
    vec_argmax_onehot(ls);
    std::vector<Gradient> grads;
    for (int i = 0; i + 2 < 9; i += 3) grads.push_back({ls[std::size_t(i)], ls[std::size_t(i + 1)], ls[std::size_t(i + 2)]});
    weighted_histogram(g, grads, HistogramSpec::uniform(8));
    std::vector<std::pair<int, std::size_t>> shape;
    for (std::uint32_t i = 0; i < g.size(); ++i) {
      const auto& n = g.node(i);
      shape.emplace_back(int(n.kind), std::size_t(n.lhs) << 32 | n.rhs);
    }
    return shape;
  };
  CHECK(trace(1) == trace(2));
  CHECK(trace(1) == trace(99));
}
