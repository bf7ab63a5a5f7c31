#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stgemm {

/// Invalid argument: bad dimensions, out-of-range tunables, mismatched shapes.
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A sparse structure whose arrays contradict each other.
class CorruptionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A base-3 byte code outside [0, 243).
class InvalidCodeError : public CorruptionError {
  public:
    explicit InvalidCodeError(unsigned code)
        : CorruptionError("invalid base-3 code " + std::to_string(code) + " (must be < 243)"),
          code_(code) {}
    unsigned code() const noexcept { return code_; }

  private:
    unsigned code_;
};

/// A kernel disagreed with the reference GEMM.
class CorrectnessError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed on-disk data. `offset()` is the byte position where decoding failed.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string &what, std::size_t offset)
        : std::runtime_error(what + " at byte offset " + std::to_string(offset)),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

} // namespace stgemm
