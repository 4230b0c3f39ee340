// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "fheadapt/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

namespace fheadapt::sim {

namespace {

thread_local Party g_party = Party::Client;
std::atomic<std::uint64_t> g_client_decrypts{0};
std::atomic<std::uint64_t> g_server_decrypts{0};

// Covers the rounding of both the simulated value and the plaintext
// reference it is checked against.
constexpr double kRoundingSlack = 4.0 * std::numeric_limits<double>::epsilon();

std::string level_message(const char* op, int la, int lb) {
  return std::string(op) + " needs a level but operands are at levels " +
         std::to_string(la) + " and " + std::to_string(lb);
}

}  // namespace

void SimParams::validate() const {
  if (depth_budget < 1) {
    throw InvalidArgument("depth_budget must be >= 1, got " +
                          std::to_string(depth_budget));
  }
  if (!(noise_per_mul >= 0.0) || !std::isfinite(noise_per_mul)) {
    throw InvalidArgument("noise_per_mul must be a finite value >= 0");
  }
}

PartyScope::PartyScope(Party p) : previous_(g_party) { g_party = p; }
PartyScope::~PartyScope() { g_party = previous_; }
Party PartyScope::current() { return g_party; }

Evaluator::Evaluator(SimParams params, std::uint64_t seed)
    : params_(params), rng_(seed) {
  params_.validate();
  min_level_ = params_.depth_budget;
}

Ciphertext Evaluator::track(const Ciphertext& ct) {
  min_level_ = std::min(min_level_, ct.level);
  return ct;
}

double Evaluator::sample_noise() {
  const double sigma = params_.noise_per_mul;
  double z = gauss_(rng_);
  while (std::abs(z) > kNoiseTruncation) z = gauss_(rng_);
  return sigma * z;
}

Ciphertext Evaluator::encrypt(double x) {
  ++counts_.encrypt;
  return Ciphertext{x, params_.depth_budget, 0.0};
}

Ciphertext Evaluator::add(const Ciphertext& a, const Ciphertext& b) {
  ++counts_.add;
  Ciphertext r{a.value + b.value, std::min(a.level, b.level),
               a.noise_bound + b.noise_bound};
  if (params_.noise_per_mul > 0.0) {
    r.noise_bound += kRoundingSlack * (std::abs(r.value) + r.noise_bound);
  }
  return track(r);
}

Ciphertext Evaluator::sub(const Ciphertext& a, const Ciphertext& b) {
  ++counts_.add;
  Ciphertext r{a.value - b.value, std::min(a.level, b.level),
               a.noise_bound + b.noise_bound};
  if (params_.noise_per_mul > 0.0) {
    r.noise_bound += kRoundingSlack * (std::abs(r.value) + r.noise_bound);
  }
  return track(r);
}

Ciphertext Evaluator::neg(const Ciphertext& a) {
  ++counts_.add;
  return track(Ciphertext{-a.value, a.level, a.noise_bound});
}

Ciphertext Evaluator::add_plain(const Ciphertext& a, double k) {
  ++counts_.add;
  Ciphertext r{a.value + k, a.level, a.noise_bound};
  if (params_.noise_per_mul > 0.0) {
    r.noise_bound += kRoundingSlack * (std::abs(r.value) + r.noise_bound);
  }
  return track(r);
}

Ciphertext Evaluator::mul(const Ciphertext& a, const Ciphertext& b) {
  const int level = std::min(a.level, b.level);
  if (level < 1) throw DepthExhausted(level_message("mul", a.level, b.level));
  ++counts_.mul;
  Ciphertext r{a.value * b.value, level - 1, 0.0};
  if (params_.noise_per_mul > 0.0) {
    const double ea = a.noise_bound;
    const double eb = b.noise_bound;
    r.noise_bound = std::abs(a.value) * eb + std::abs(b.value) * ea + ea * eb;
    r.value += sample_noise();
    r.noise_bound += kNoiseTruncation * params_.noise_per_mul;
    r.noise_bound += kRoundingSlack * (std::abs(r.value) + r.noise_bound);
  }
  return track(r);
}

Ciphertext Evaluator::mul_plain(const Ciphertext& a, double k) {
  const bool rescale = params_.plain_mul_consumes_level;
  if (rescale && a.level < 1) {
    throw DepthExhausted(level_message("mul_plain", a.level, a.level));
  }
  ++counts_.mul_plain;
  Ciphertext r{a.value * k, rescale ? a.level - 1 : a.level,
               std::abs(k) * a.noise_bound};
  if (params_.noise_per_mul > 0.0) {
    if (rescale) {
      r.value += sample_noise();
      r.noise_bound += kNoiseTruncation * params_.noise_per_mul;
    }
    r.noise_bound += kRoundingSlack * (std::abs(r.value) + r.noise_bound);
  }
  return track(r);
}

double Decryptor::decrypt(const Ciphertext& ct) const {
  if (PartyScope::current() == Party::Server) {
    g_server_decrypts.fetch_add(1, std::memory_order_relaxed);
  } else {
    g_client_decrypts.fetch_add(1, std::memory_order_relaxed);
  }
  return ct.value;
}

std::uint64_t Decryptor::calls(Party p) {
  return p == Party::Server ? g_server_decrypts.load() : g_client_decrypts.load();
}

void Decryptor::reset_counters() {
  g_server_decrypts = 0;
  g_client_decrypts = 0;
}

Ciphertext encrypt(double x, const SimParams& ctx) {
  ctx.validate();
  return Ciphertext{x, ctx.depth_budget, 0.0};
}

double decrypt(const Ciphertext& ct) { return Decryptor{}.decrypt(ct); }

}  // namespace fheadapt::sim
