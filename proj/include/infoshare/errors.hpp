#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace infoshare {

// Dimension mismatches and out-of-domain parameters raise std::invalid_argument
// directly. The types below cover the remaining failure classes.

/// The indifference equation has no root: the cost exceeds the peak of G.
class NoRootError : public std::runtime_error {
 public:
  NoRootError(double peak, double target)
      : std::runtime_error("no indifference root: peak " + std::to_string(peak) +
                           " < target " + std::to_string(target)),
        peak_(peak),
        target_(target) {}
  double peak() const noexcept { return peak_; }
  double target() const noexcept { return target_; }

 private:
  double peak_;
  double target_;
};

/// A grid enumeration would exceed the configured point budget.
class ResourceLimitError : public std::runtime_error {
 public:
  ResourceLimitError(std::size_t requested, std::size_t limit)
      : std::runtime_error("grid of " + std::to_string(requested) +
                           " points exceeds limit " + std::to_string(limit)),
        requested_(requested),
        limit_(limit) {}
  std::size_t requested() const noexcept { return requested_; }
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t requested_;
  std::size_t limit_;
};

class UnsupportedModeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration/instance file error carrying the 1-based line and field name.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", field '" + field +
                           "': " + what),
        line_(line),
        field_(std::move(field)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace infoshare
