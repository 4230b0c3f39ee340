// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian record framing: [u32 tag][u32 payload length][payload].

#ifndef FHEADAPT_SRC_WIRE_HPP_
#define FHEADAPT_SRC_WIRE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fheadapt/residual.hpp"
#include "fheadapt/sim.hpp"

namespace fheadapt::protocol::wire {

constexpr std::uint32_t fourcc(const char (&s)[5]) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[0])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[3])) << 24;
}

inline constexpr std::uint32_t kHead = fourcc("HEAD");
inline constexpr std::uint32_t kInput = fourcc("INPT");
inline constexpr std::uint32_t kComparison = fourcc("CREQ");
inline constexpr std::uint32_t kSqrt = fourcc("SREQ");
inline constexpr std::uint32_t kValue = fourcc("VDEF");
inline constexpr std::uint32_t kSlot = fourcc("SLOT");
inline constexpr std::uint32_t kBoolResult = fourcc("BRES");
inline constexpr std::uint32_t kSqrtResult = fourcc("SRES");
inline constexpr std::uint32_t kOutput = fourcc("OUTP");

enum class MessageKind : std::uint32_t {
  Input = 1,
  RoundRequest = 2,
  RoundResponse = 3,
  Outputs = 4,
  Package = 5,
};

std::string tag_name(std::uint32_t tag);

class Writer {
 public:
  void begin(std::uint32_t tag);
  void end();

  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(const std::string& s);
  void cipher(const sim::Ciphertext& ct);
  void residual(const deferred::ResidualFunction& f);

  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t open_ = 0;
  bool in_record_ = false;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool at_end() const { return pos_ == bytes_.size(); }
  // Opens the next record and returns its tag.
  std::uint32_t next();
  // Fails unless the open record was consumed exactly.
  void close();
  void expect(std::uint32_t tag);

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  sim::Ciphertext cipher();
  deferred::ResidualFunction residual();

  std::size_t offset() const { return pos_; }

 private:
  void need(std::size_t n, const char* what);

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::size_t record_end_ = 0;
  std::uint32_t tag_ = 0;
};

}  // namespace fheadapt::protocol::wire

#endif  // FHEADAPT_SRC_WIRE_HPP_
