// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic leveled-arithmetic simulator with the operation set of a CKKS
// backend. Ciphertexts carry their plaintext, the remaining multiplicative
// level and an accumulated error bound. No actual encryption happens; the
// simulator exists to check circuit shape (depth, branchlessness) exactly.

#ifndef FHEADAPT_SIM_HPP_
#define FHEADAPT_SIM_HPP_

#include <cstdint>
#include <random>

#include "fheadapt/errors.hpp"

namespace fheadapt::sim {

struct SimParams {
  int depth_budget = 30;
  // Standard deviation of the perturbation injected per multiplication.
  // Zero selects exact mode.
  double noise_per_mul = 0.0;
  bool plain_mul_consumes_level = true;

  void validate() const;
};

struct Ciphertext {
  double value = 0.0;
  int level = 0;
  double noise_bound = 0.0;
};

enum class Party { Client, Server };

// Which party the current thread is executing for. Decryption calls are
// tallied per party so tests can prove the server path never decrypts.
class PartyScope {
 public:
  explicit PartyScope(Party p);
  ~PartyScope();
  PartyScope(const PartyScope&) = delete;
  PartyScope& operator=(const PartyScope&) = delete;

  static Party current();

 private:
  Party previous_;
};

struct OpCounts {
  std::uint64_t encrypt = 0;
  std::uint64_t add = 0;  // add, sub, neg, add_plain
  std::uint64_t mul = 0;
  std::uint64_t mul_plain = 0;

  OpCounts operator-(const OpCounts& o) const {
    return {encrypt - o.encrypt, add - o.add, mul - o.mul,
            mul_plain - o.mul_plain};
  }
  OpCounts& operator+=(const OpCounts& o) {
    encrypt += o.encrypt;
    add += o.add;
    mul += o.mul;
    mul_plain += o.mul_plain;
    return *this;
  }
  bool operator==(const OpCounts&) const = default;
};

// Public-key side of the backend: everything either party may do without
// the secret key. The random source is owned by the evaluator so that noisy
// runs are reproducible from the seed.
class Evaluator {
 public:
  explicit Evaluator(SimParams params, std::uint64_t seed = 0);

  const SimParams& params() const noexcept { return params_; }
  const OpCounts& counts() const noexcept { return counts_; }
  // Lowest level of any ciphertext produced since the last reset.
  int min_level() const noexcept { return min_level_; }
  void reset_min_level() noexcept { min_level_ = params_.depth_budget; }

  Ciphertext encrypt(double x);

  Ciphertext add(const Ciphertext& a, const Ciphertext& b);
  Ciphertext sub(const Ciphertext& a, const Ciphertext& b);
  Ciphertext neg(const Ciphertext& a);
  Ciphertext add_plain(const Ciphertext& a, double k);

  // Throws DepthExhausted when min(a.level, b.level) == 0.
  Ciphertext mul(const Ciphertext& a, const Ciphertext& b);
  Ciphertext mul_plain(const Ciphertext& a, double k);

 private:
  double sample_noise();
  Ciphertext track(const Ciphertext& ct);

  SimParams params_;
  OpCounts counts_;
  int min_level_ = 0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

// Secret-key side. Only the client should ever hold one.
class Decryptor {
 public:
  double decrypt(const Ciphertext& ct) const;

  static std::uint64_t calls(Party p);
  static void reset_counters();
};

Ciphertext encrypt(double x, const SimParams& ctx);
double decrypt(const Ciphertext& ct);

// Perturbations are truncated at this many standard deviations, which is what
// lets noise_bound be a hard bound rather than a confidence interval.
inline constexpr double kNoiseTruncation = 6.0;

}  // namespace fheadapt::sim

#endif  // FHEADAPT_SIM_HPP_
