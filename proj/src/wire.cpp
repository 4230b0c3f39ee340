// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "wire.hpp"

#include <bit>
#include <cmath>

namespace fheadapt::protocol::wire {

std::string tag_name(std::uint32_t tag) {
  std::string s(4, '?');
  for (int i = 0; i < 4; ++i) {
    const char c = static_cast<char>((tag >> (8 * i)) & 0xff);
    if (c >= 0x20 && c < 0x7f) s[i] = c;
  }
  return s;
}

void Writer::begin(std::uint32_t tag) {
  if (in_record_) throw Error("nested wire record");
  u32(tag);
  open_ = buf_.size();
  u32(0);
  in_record_ = true;
}

void Writer::end() {
  const auto len = static_cast<std::uint32_t>(buf_.size() - open_ - 4);
  for (int i = 0; i < 4; ++i) buf_[open_ + i] = static_cast<std::uint8_t>(len >> (8 * i));
  in_record_ = false;
}

void Writer::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void Writer::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void Writer::cipher(const sim::Ciphertext& ct) {
  f64(ct.value);
  u32(static_cast<std::uint32_t>(ct.level));
  f64(ct.noise_bound);
}

void Writer::residual(const deferred::ResidualFunction& f) {
  u32(static_cast<std::uint32_t>(f.size()));
  for (std::size_t t = 0; t < f.size(); ++t) {
    const auto mono = f.monomial(t);
    u32(static_cast<std::uint32_t>(mono.size()));
    for (deferred::ParamId p : mono) u64(p.raw);
    cipher(f.coefficient(t));
  }
}

// ---------------------------------------------------------------------------

void Reader::need(std::size_t n, const char* what) {
  const std::size_t limit = record_end_ != 0 ? record_end_ : bytes_.size();
  if (n > limit - pos_) {
    throw ParseError(std::string("truncated ") + what, pos_);
  }
}

std::uint32_t Reader::next() {
  record_end_ = 0;
  need(8, "record header");
  const std::size_t start = pos_;
  tag_ = u32();
  const std::uint32_t len = u32();
  if (len > bytes_.size() - pos_) {
    throw ParseError("record " + tag_name(tag_) + " runs past the end of the message", start);
  }
  record_end_ = pos_ + len;
  return tag_;
}

void Reader::close() {
  if (pos_ != record_end_) {
    throw ParseError("record " + tag_name(tag_) + " has trailing bytes", pos_);
  }
  record_end_ = 0;
}

void Reader::expect(std::uint32_t tag) {
  const std::size_t start = pos_;
  if (next() != tag) {
    throw ParseError("expected record " + tag_name(tag) + ", found " + tag_name(tag_), start);
  }
}

std::uint32_t Reader::u32() {
  need(4, "u32");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t Reader::u64() {
  need(8, "u64");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

double Reader::f64() {
  const std::size_t start = pos_;
  const double v = std::bit_cast<double>(u64());
  if (!std::isfinite(v)) throw ParseError("non-finite float", start);
  return v;
}

std::string Reader::str() {
  const std::uint32_t n = u32();
  need(n, "string");
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
  pos_ += n;
  return s;
}

sim::Ciphertext Reader::cipher() {
  sim::Ciphertext ct;
  ct.value = f64();
  ct.level = static_cast<int>(u32());
  ct.noise_bound = f64();
  return ct;
}

deferred::ResidualFunction Reader::residual() {
  deferred::ResidualFunction f;
  const std::uint32_t terms = u32();
  std::vector<deferred::ParamId> mono;
  for (std::uint32_t t = 0; t < terms; ++t) {
    const std::uint32_t n = u32();
    need(static_cast<std::size_t>(n) * 8, "monomial");
    mono.assign(n, {});
    for (auto& p : mono) p.raw = u64();
    f.add_term(mono, cipher());
  }
  return f;
}

}  // namespace fheadapt::protocol::wire
