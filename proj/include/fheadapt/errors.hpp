// Copyright 2026 The fheadapt Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef FHEADAPT_ERRORS_HPP_
#define FHEADAPT_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fheadapt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A circuit asked for more ciphertext-ciphertext (or rescaled plaintext)
// multiplications than the remaining level allows.
class DepthExhausted : public Error {
 public:
  explicit DepthExhausted(const std::string& what, std::string stage = {})
      : Error(stage.empty() ? what : "stage " + stage + ": " + what),
        detail_(what),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }
  DepthExhausted with_stage(const std::string& stage) const {
    return DepthExhausted(detail_, stage);
  }

 private:
  std::string detail_;
  std::string stage_;
};

class DeferralUnsupported : public Error {
 public:
  using Error::Error;
};

class SignUnresolvable : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class MissingAssignment : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed bytes or text. offset is the byte position where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace fheadapt

#endif  // FHEADAPT_ERRORS_HPP_
