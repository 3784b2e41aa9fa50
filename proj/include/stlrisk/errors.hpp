#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stlrisk {

/// Formula text could not be parsed; `position` is a 0-based byte offset.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, std::size_t position)
      : std::runtime_error(msg + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// A domain invariant or precondition was violated.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input file; the message carries location context.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Signal enumeration would exceed the configured cap.
class EnumerationCapError : public std::runtime_error {
public:
  EnumerationCapError(std::uint64_t count, std::uint64_t cap)
      : std::runtime_error("enumeration support count " + std::to_string(count) +
                           " exceeds cap " + std::to_string(cap)),
        count_(count),
        cap_(cap) {}

  std::uint64_t count() const { return count_; }
  std::uint64_t cap() const { return cap_; }

private:
  std::uint64_t count_;
  std::uint64_t cap_;
};

} // namespace stlrisk
