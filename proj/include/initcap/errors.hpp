#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace initcap {

/// Precondition violated by the caller (bad dimensions, out-of-range values).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed on-disk data. Carries the offending field and its byte offset.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string field, std::uint64_t offset, const std::string& detail)
      : std::runtime_error(field + " at byte " + std::to_string(offset) + ": " + detail),
        field_(std::move(field)),
        offset_(offset) {}

  const std::string& field() const noexcept { return field_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::string field_;
  std::uint64_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Monte-Carlo estimation could not produce a trustworthy value.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace initcap
