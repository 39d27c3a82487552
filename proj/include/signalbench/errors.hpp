#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace signalbench {

/// Invalid configuration file or value. The message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Protocol-level misuse: out-of-range wish, unknown signal code, bad message.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A frame that could not be decoded. `offset` is the byte position of the failure.
class DecodeError : public ProtocolError {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : ProtocolError(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// API used out of order (step after done, step before reset, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace signalbench
