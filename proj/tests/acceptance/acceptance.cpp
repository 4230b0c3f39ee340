// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fheadapt/config.hpp"
#include "fheadapt/graph.hpp"
#include "fheadapt/image.hpp"
#include "fheadapt/kernels.hpp"
#include "fheadapt/keypoints.hpp"
#include "fheadapt/lower.hpp"
#include "fheadapt/protocol.hpp"
#include "fheadapt/sift.hpp"
#include "fheadapt/sim.hpp"
#include "support.hpp"

namespace fa = fheadapt;
namespace dd = fheadapt::deferred;
namespace pr = fheadapt::protocol;
namespace sim = fheadapt::sim;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Verdict& v, double elapsed, double limit) {
  const bool in_time = limit <= 0.0 || elapsed < limit;
  const bool pass = v.pass && in_time;
  if (!pass) ++failures;
  char timing[96];
  if (limit > 0.0) {
    std::snprintf(timing, sizeof timing, "%.2f s, limit %.0f s", elapsed, limit);
  } else {
    std::snprintf(timing, sizeof timing, "%.2f s", elapsed);
  }
  std::printf("%s %2d %s: %s (%s)\n", pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), timing);
  std::fflush(stdout);
}

template <class... Args>
std::string format(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

pr::ProtocolOptions exact_options(int depth_budget, std::uint64_t seed) {
  pr::ProtocolOptions o;
  o.sim.depth_budget = depth_budget;
  o.sim.noise_per_mul = 0.0;
  o.seed = seed;
  return o;
}

// ---------------------------------------------------------------------------
// 1. Depth law.

Verdict depth_law() {
  Verdict v;
  int checked = 0;
  for (int n : {2, 4, 8, 16, 32, 64, 128, 256}) {
    std::mt19937_64 rng{std::uint64_t(n)};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (double& x : xs) x = u(rng);
    const double expected_max = *std::max_element(xs.begin(), xs.end());
    for (int which = 0; which < 2; ++which) {
      const int budget = 2 * n + 8;
      pr::Program program = [&](pr::Session& s) {
        s.begin_stage(which == 0 ? "vec_max" : "running_max");
        std::vector<dd::Expr> leaves;
        for (const auto& in : s.inputs()) leaves.push_back(s.leaf(in));
        const dd::Expr m = which == 0 ? fa::kernels::vec_max(leaves) : fa::kernels::running_max(leaves);
        s.output("max", std::span<const dd::Expr>(&m, 1));
      };
      pr::Client client(exact_options(budget, 7).sim, 11);
      const pr::RunResult r = pr::run_interactive(program, client, xs, exact_options(budget, 7));
      const int levels = budget - r.stages.back().min_level;
      const int want = which == 0 ? static_cast<int>(std::ceil(std::log2(n))) : n;
      const double got = r.outputs.at("max")[0];
      if (levels != want || got != expected_max) {
        v.pass = false;
        v.detail += format("[%s N=%d levels %d want %d, max %g want %g] ",
                           which == 0 ? "vec_max" : "running_max", n, levels, want, got, expected_max);
      }
      ++checked;
    }
  }
  if (v.pass) v.detail = format("%d runs, vec_max = ceil(log2 N) and running_max = N levels", checked);
  return v;
}

// ---------------------------------------------------------------------------
// 2. Deferred example.

std::string read_text(const std::string& path) {
  const auto bytes = fa::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

Verdict deferred_example() {
  sim::Evaluator ev(sim::SimParams{});
  dd::Graph g;
  auto var = [&](const char* name, double x) { return g.cipher(ev.encrypt(x), name); };
  const dd::Expr x = var("x", 3), y = var("y", 1), z = var("z", 2), w = var("w", 5);
  const dd::Expr c = var("c", 10), d = var("d", 20), e = var("e", 30);
  const dd::Expr f = dd::compare(x, y) * c + dd::compare(z, w) * d + dd::greater_equal(y, x) * e;
  const dd::DeferredPackage pkg = dd::lower(std::span<const dd::Expr>(&f, 1), ev);
  const std::string got =
      "requests = " + std::to_string(pkg.comparisons.size()) + "\n" + dd::dump(dd::normal_form(f));
  const std::string want = read_text(std::string(FHEADAPT_GOLDEN_DIR) + "/deferred_example.txt");
  const std::string got_pkg = pr::dump_package(pkg);
  const std::string want_pkg =
      read_text(std::string(FHEADAPT_GOLDEN_DIR) + "/deferred_example_package.txt");
  Verdict v;
  v.pass = got == want && got_pkg == want_pkg;
  v.detail = v.pass ? "2 requests, normal form {c1: c - e, c2: d, {}: e} matches golden"
                    : "golden mismatch:\n" + got + got_pkg;
  return v;
}

// ---------------------------------------------------------------------------
// 3. Deferred soundness.

Verdict deferred_soundness() {
  constexpr int kTotal = 10000;
  constexpr int kChunk = 500;
  constexpr double kTol = 1e-9;
  fa::testing::ExprShape shape;
  fa::testing::ExprGenerator gen(2026, shape);
  int checked = 0, excluded = 0, mismatches = 0;
  double worst = 0.0;
  std::string first_bad;
  for (int base = 0; base < kTotal; base += kChunk) {
    std::vector<std::unique_ptr<fa::testing::RandomExpr>> exprs;
    std::vector<double> inputs;
    std::vector<double> reference, scale, margin;
    for (int i = 0; i < kChunk; ++i) {
      exprs.push_back(gen.next());
      const std::vector<double> xs = gen.inputs();
      inputs.insert(inputs.end(), xs.begin(), xs.end());
      fa::testing::BranchyEval eval{xs};
      reference.push_back(eval(*exprs.back()));
      scale.push_back(eval.scale);
      margin.push_back(eval.margin);
    }
    pr::Program program = [&](pr::Session& s) {
      s.begin_stage("soundness");
      std::vector<dd::Expr> targets;
      for (int i = 0; i < kChunk; ++i) {
        std::vector<dd::Expr> leaves;
        for (int k = 0; k < shape.inputs; ++k) {
          leaves.push_back(s.leaf(s.inputs()[std::size_t(i * shape.inputs + k)]));
        }
        targets.push_back(fa::testing::build(s.graph(), *exprs[std::size_t(i)], leaves));
      }
      s.output("out", targets);
    };
    const pr::ProtocolOptions opts = exact_options(64, std::uint64_t(base) + 1);
    pr::Client ci(opts.sim, 3), cd(opts.sim, 5);
    const pr::RunResult ri = pr::run_interactive(program, ci, inputs, opts);
    const pr::RunResult rd = pr::run_deferred(program, cd, inputs, opts);
    if (rd.trace.rounds.size() != 1) ++mismatches;
    for (int i = 0; i < kChunk; ++i) {
      const std::size_t k = std::size_t(i);
      const double band = kTol * scale[k];
      if (margin[k] <= band) {
        ++excluded;
        continue;
      }
      ++checked;
      const double a = ri.outputs.at("out")[k];
      const double b = rd.outputs.at("out")[k];
      const double err = std::max(std::abs(a - reference[k]), std::abs(b - reference[k])) / scale[k];
      worst = std::max(worst, err);
      if (!(err <= kTol)) {
        if (mismatches == 0) {
          first_bad = format(" first: #%d ref %.17g interactive %.17g deferred %.17g", base + i,
                             reference[k], a, b);
        }
        ++mismatches;
      }
    }
  }
  Verdict v;
  v.pass = mismatches == 0;
  v.detail = format("%d expressions, %d agree across deferred/interactive/branchy, %d in eps-band (ties included), "
                    "%d mismatches, worst scaled error %.2e",
                    kTotal, checked, excluded, mismatches, worst) +
             first_bad;
  return v;
}

// ---------------------------------------------------------------------------
// 4. Rational deferral.

Verdict rational_deferral() {
  constexpr int kTotal = 10000;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> mag(-9.0, 1.0);  // log10 magnitude
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> kind(0, 2);
  auto number = [&](bool allow_zero) {
    double x = std::pow(10.0, mag(rng));
    if (x <= 1e-9) x = 2e-9;
    if (allow_zero && coin(rng) && coin(rng) && coin(rng)) x = 0.0;
    return coin(rng) ? x : -x;
  };
  struct Sample {
    double n1, d1, n2, d2;
    fa::deferred::DenSign s1, s2;
    bool rhs_plain;  // compare against a bare expression
    bool less_equal;
  };
  auto sign_of = [&](double d) {
    switch (kind(rng)) {
      case 0:
        return fa::deferred::DenSign::Unknown;
      default:
        return d > 0 ? fa::deferred::DenSign::Positive : fa::deferred::DenSign::Negative;
    }
  };
  std::vector<Sample> samples;
  std::vector<double> inputs;
  for (int i = 0; i < kTotal; ++i) {
    Sample s;
    s.n1 = number(true);
    s.d1 = number(false);
    s.n2 = number(true);
    s.d2 = number(false);
    s.s1 = sign_of(s.d1);
    s.s2 = sign_of(s.d2);
    s.rhs_plain = kind(rng) == 0;
    s.less_equal = coin(rng);
    if (s.rhs_plain) s.d2 = 1.0;
    samples.push_back(s);
    inputs.insert(inputs.end(), {s.n1, s.d1, s.n2, s.d2});
  }
  pr::Program program = [&](pr::Session& ses) {
    ses.begin_stage("rational");
    std::vector<dd::Expr> targets;
    for (int i = 0; i < kTotal; ++i) {
      const Sample& s = samples[std::size_t(i)];
      auto in = [&](int k) { return ses.leaf(ses.inputs()[std::size_t(4 * i + k)]); };
      const dd::Rational r = dd::rational_div(in(0), in(1), s.s1);
      if (s.rhs_plain) {
        targets.push_back(s.less_equal ? dd::rational_less_equal(r, dd::as_rational(in(2)))
                                       : dd::rational_less(r, in(2)));
      } else {
        const dd::Rational q = dd::rational_div(in(2), in(3), s.s2);
        targets.push_back(s.less_equal ? dd::rational_less_equal(r, q) : dd::rational_less(r, q));
      }
    }
    ses.output("out", targets);
  };
  const pr::ProtocolOptions opts = exact_options(30, 9);
  pr::Client ci(opts.sim, 1), cd(opts.sim, 2);
  const pr::RunResult ri = pr::run_interactive(program, ci, inputs, opts);
  const pr::RunResult rd = pr::run_deferred(program, cd, inputs, opts);
  int agree = 0, excluded = 0, wrong = 0, unknown = 0;
  for (int i = 0; i < kTotal; ++i) {
    const Sample& s = samples[std::size_t(i)];
    const double q1 = s.n1 / s.d1;
    const double q2 = s.n2 / s.d2;
    if (s.s1 == fa::deferred::DenSign::Unknown) ++unknown;
    if (std::abs(q1 - q2) <= 1e-9 * std::max({1.0, std::abs(q1), std::abs(q2)}) && q1 != q2) {
      ++excluded;
      continue;
    }
    const double want = (s.less_equal ? q1 <= q2 : q1 < q2) ? 1.0 : 0.0;
    if (ri.outputs.at("out")[std::size_t(i)] == want && rd.outputs.at("out")[std::size_t(i)] == want) {
      ++agree;
    } else {
      ++wrong;
    }
  }
  Verdict v;
  v.pass = wrong == 0;
  v.detail = format("%d comparisons (%d unknown-sign lhs), %d agree with divide-then-compare in both "
                    "modes, %d disagree, %d in eps-band",
                    kTotal, unknown, agree, wrong, excluded);
  return v;
}

// ---------------------------------------------------------------------------
// 5 and 6 (histogram half). Bin masks against atan2.

struct HistogramOutcome {
  Verdict binning;
  double max_onehot_error = 0.0;
  double max_conservation_error = 0.0;
  int histograms = 0;
};

int atan2_bin(double dx, double dy, int bins, double* distance) {
  double theta = std::atan2(dy, dx);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  const double width = 2.0 * std::numbers::pi / bins;
  const double pos = theta / width;
  const double nearest = std::round(pos);
  *distance = std::abs(pos - nearest) * width;
  return static_cast<int>(std::floor(pos)) % bins;
}

HistogramOutcome histogram_binning() {
  constexpr int kSamples = 100000;
  constexpr int kBins = 36;
  constexpr int kWindow = 49;
  constexpr double kBand = 1e-9;
  const auto spec = fa::kernels::HistogramSpec::uniform(kBins);
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  sim::Evaluator ev(sim::SimParams{});
  HistogramOutcome out;
  int full_ok = 0, full_bad = 0, tan_ok = 0, tan_bad = 0, excluded = 0;
  for (int base = 0; base < kSamples; base += kWindow) {
    const int count = std::min(kWindow, kSamples - base);
    dd::Graph g;
    fa::testing::PlainEval eval(g);
    std::vector<fa::kernels::Gradient> grads;
    std::vector<double> weights;
    for (int i = 0; i < count; ++i) {
      const double dx = u(rng);
      const double dy = u(rng);
      fa::kernels::Gradient gr;
      gr.dx = g.cipher(ev.encrypt(dx));
      gr.dy = g.cipher(ev.encrypt(dy));
      gr.weight = gr.dx * gr.dx + gr.dy * gr.dy;
      weights.push_back(dx * dx + dy * dy);
      grads.push_back(gr);

      double distance = 0.0;
      const int want = atan2_bin(dx, dy, kBins, &distance);
      if (distance <= kBand) {
        ++excluded;
        continue;
      }
      const std::vector<dd::Expr> masks = fa::kernels::bin_masks(gr.dx, gr.dy, spec);
      bool ok = true;
      for (int j = 0; j < kBins; ++j) ok = ok && eval(masks[std::size_t(j)]) == (j == want ? 1.0 : 0.0);
      ok ? ++full_ok : ++full_bad;
      if (dx > 0.0) {
        bool tok = true;
        for (int j = 0; j < kBins; ++j) {
          const double m = eval(fa::kernels::bin_mask_tan(gr, spec, std::size_t(j)));
          tok = tok && m == (j == want ? 1.0 : 0.0);
        }
        tok ? ++tan_ok : ++tan_bad;
      }
    }
    const std::vector<dd::Expr> hist = fa::kernels::weighted_histogram(g, grads, spec);
    const fa::kernels::ArgMax am = fa::kernels::vec_argmax_onehot(hist);
    double mask_sum = 0.0, bin_sum = 0.0, weight_sum = 0.0;
    for (const dd::Expr& m : am.onehot.mask) mask_sum += eval(m);
    for (const dd::Expr& b : hist) bin_sum += eval(b);
    for (double w : weights) weight_sum += w;
    out.max_onehot_error = std::max(out.max_onehot_error, std::abs(mask_sum - 1.0));
    out.max_conservation_error = std::max(out.max_conservation_error, std::abs(bin_sum - weight_sum));
    ++out.histograms;
  }
  out.binning.pass = full_bad == 0 && tan_bad == 0;
  out.binning.detail = format("%d gradients: full-circle %d agree / %d disagree, tan-form (dx > 0) "
                              "%d agree / %d disagree, %d within 1e-9 of a boundary",
                              kSamples, full_ok, full_bad, tan_ok, tan_bad, excluded);
  return out;
}

// ---------------------------------------------------------------------------
// 7-10. Pipeline runs.

struct PipelineRun {
  std::string image;
  fa::Mode mode;
  fa::sift::PipelineResult result;
};

std::vector<PipelineRun> run_all(const std::vector<std::string>& images) {
  std::vector<PipelineRun> runs;
  for (const std::string& name : images) {
    const fa::Image img = fa::testing::load_image(name);
    for (fa::Mode mode : {fa::Mode::Plaintext, fa::Mode::Interactive, fa::Mode::Deferred}) {
      fa::RunConfig cfg;
      cfg.mode = mode;
      cfg.seed = 17;
      runs.push_back({name, mode, fa::sift::run_pipeline(img, cfg)});
    }
  }
  return runs;
}

Verdict mode_equivalence(const std::vector<PipelineRun>& runs, std::size_t synthetic) {
  Verdict v;
  std::size_t keypoints = 0, synthetic_excluded = 0, natural_excluded = 0;
  for (std::size_t i = 0; i + 2 < runs.size(); i += 3) {
    const auto& plain = runs[i].result.keypoints;
    const auto& inter = runs[i + 1].result.keypoints;
    const auto& def = runs[i + 2].result.keypoints;
    keypoints += plain.keypoints.size();
    for (const auto& [a, b, label] :
         {std::tuple{&plain, &inter, "plaintext/interactive"}, std::tuple{&plain, &def, "plaintext/deferred"},
          std::tuple{&inter, &def, "interactive/deferred"}}) {
      const fa::DiffSummary d = fa::diff_keypoints(*a, *b);
      (i / 3 < synthetic ? synthetic_excluded : natural_excluded) += d.excluded;
      if (d.missing != 0 || d.spurious != 0 || d.orientation_agree != d.matched) {
        v.pass = false;
        v.detail += format("[%s %s: %zu missing, %zu spurious, %zu/%zu orientations] ",
                           runs[i].image.c_str(), label, d.missing, d.spurious, d.orientation_agree,
                           d.matched);
      }
    }
    if (!plain.ambiguous.empty()) {
      std::printf("  note: %s has %zu ambiguous oracle keypoints\n", runs[i].image.c_str(),
                  plain.ambiguous.size());
    }
  }
  if (v.pass) {
    v.detail = format("%zu images x 3 modes, %zu keypoints identical with equal orientation bins; "
                      "eps-boundary exclusions: %zu synthetic, %zu natural",
                      runs.size() / 3, keypoints, synthetic_excluded, natural_excluded);
  }
  if (synthetic_excluded != 0) v.pass = false;
  return v;
}

Verdict onehot_conservation(const HistogramOutcome& h, const std::vector<PipelineRun>& runs) {
  constexpr double kTol = 1e-6;
  double onehot = h.max_onehot_error;
  double conservation = h.max_conservation_error;
  std::size_t argmaxes = std::size_t(h.histograms);
  for (const PipelineRun& r : runs) {
    if (r.mode == fa::Mode::Plaintext) continue;
    onehot = std::max(onehot, r.result.checks.max_onehot_error);
    conservation = std::max(conservation, r.result.checks.max_conservation_error);
    argmaxes += r.result.checks.candidates;
  }
  Verdict v;
  v.pass = onehot <= kTol && conservation <= kTol;
  v.detail = format("%zu histograms/argmaxes: max |sum mask - 1| = %.2e, max |sum bins - sum "
                    "weights| = %.2e (tol 1e-6)",
                    argmaxes, onehot, conservation);
  return v;
}

Verdict round_law(const std::vector<PipelineRun>& runs) {
  Verdict v;
  std::size_t deferred = 0, interactive = 0, interactive_rounds = 0;
  for (const PipelineRun& r : runs) {
    const auto& res = r.result;
    if (r.mode == fa::Mode::Deferred) {
      ++deferred;
      if (res.trace.rounds.size() != 1) {
        v.pass = false;
        v.detail += format("[%s deferred: %zu rounds] ", r.image.c_str(), res.trace.rounds.size());
      }
    } else if (r.mode == fa::Mode::Interactive) {
      ++interactive;
      std::size_t depth = 0, stage_rounds = 0;
      for (const auto& st : res.stages) {
        depth += st.dependency_depth;
        stage_rounds += st.rounds;
      }
      interactive_rounds = res.trace.rounds.size();
      if (res.trace.rounds.size() != depth || stage_rounds != depth) {
        v.pass = false;
        v.detail += format("[%s interactive: %zu rounds, depth %zu] ", r.image.c_str(),
                           res.trace.rounds.size(), depth);
      }
    }
  }
  if (v.pass) {
    v.detail = format("%zu deferred runs with 1 round; %zu interactive runs with rounds = measured "
                      "dependency depth (%zu)",
                      deferred, interactive, interactive_rounds);
  }
  return v;
}

std::string stage_signature(const fa::sift::PipelineResult& r) {
  std::ostringstream out;
  for (const auto& st : r.stages) {
    out << st.name << ":" << st.ops.encrypt << "," << st.ops.add << "," << st.ops.mul << ","
        << st.ops.mul_plain << ",b" << st.bytes << "[";
    for (std::size_t b : st.batch_sizes) out << b << " ";
    out << "];";
  }
  for (const auto& rec : r.trace.rounds) {
    out << "r" << rec.real + rec.decoys << "," << rec.sqrts << "," << rec.bytes_to_client << ","
        << rec.bytes_to_server << ";";
  }
  return out.str();
}

Verdict obliviousness(const std::vector<PipelineRun>& runs, std::size_t synthetic) {
  Verdict v;
  int compared = 0;
  for (fa::Mode mode : {fa::Mode::Interactive, fa::Mode::Deferred}) {
    std::string reference;
    std::string reference_image;
    for (std::size_t i = 0; i < synthetic * 3; ++i) {
      if (runs[i].mode != mode) continue;
      const std::string sig = stage_signature(runs[i].result);
      if (reference.empty()) {
        reference = sig;
        reference_image = runs[i].image;
        continue;
      }
      ++compared;
      if (sig != reference) {
        v.pass = false;
        v.detail += format("[%s vs %s differ in %s mode] ", runs[i].image.c_str(),
                           reference_image.c_str(), fa::mode_name(mode));
      }
    }
  }
  if (v.pass) {
    v.detail = format("%d same-size image pairs: identical per-stage op counts, batch sizes and "
                      "message sizes in both encrypted modes",
                      compared);
  }
  return v;
}

Verdict no_decrypt(const std::vector<PipelineRun>& runs, std::uint64_t server_total) {
  Verdict v;
  std::size_t encrypted = 0;
  std::uint64_t counted = 0;
  for (const PipelineRun& r : runs) {
    if (r.mode == fa::Mode::Plaintext) continue;
    ++encrypted;
    counted += r.result.server_decrypts;
  }
  v.pass = counted == 0 && server_total == 0;
  v.detail = format("%zu encrypted runs, %llu server-side decrypt calls (process total %llu)", encrypted,
                    static_cast<unsigned long long>(counted),
                    static_cast<unsigned long long>(server_total));
  return v;
}

}  // namespace

int main() {
  sim::Decryptor::reset_counters();
  auto timed = [](auto&& fn, double& elapsed) {
    const auto t0 = Clock::now();
    auto out = fn();
    elapsed = seconds_since(t0);
    return out;
  };
  double t = 0.0;

  Verdict v1 = timed(depth_law, t);
  report(1, "depth law", v1, t, 1.0);
  Verdict v2 = timed(deferred_example, t);
  report(2, "deferred example", v2, t, 1.0);
  Verdict v3 = timed(deferred_soundness, t);
  report(3, "deferred soundness", v3, t, 30.0);
  Verdict v4 = timed(rational_deferral, t);
  report(4, "rational deferral", v4, t, 5.0);
  double t5 = 0.0;
  HistogramOutcome h = timed(histogram_binning, t5);
  report(5, "histogram binning", h.binning, t5, 10.0);

  const std::vector<std::string> images = {"blobs_bright.pgm", "blobs_mixed.pgm", "ramp_h.pgm",
                                           "ramp_v.pgm", "impulse.pgm", "camera64.pgm"};
  double t7 = 0.0;
  const std::vector<PipelineRun> runs = timed([&] { return run_all(images); }, t7);
  report(6, "one-hot and conservation", onehot_conservation(h, runs), t5 + t7, 0.0);
  report(7, "pipeline mode equivalence", mode_equivalence(runs, 5), t7, 300.0);
  report(8, "round law", round_law(runs), 0.0, 0.0);
  report(9, "obliviousness", obliviousness(runs, 5), 0.0, 0.0);
  report(10, "no-decrypt server", no_decrypt(runs, sim::Decryptor::calls(sim::Party::Server)), 0.0,
         0.0);
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
