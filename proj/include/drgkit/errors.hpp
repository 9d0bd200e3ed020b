// SPDX-License-Identifier: Apache-2.0

#ifndef DRGKIT_ERRORS_HPP
#define DRGKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace drg {

/// Malformed input data (bad CSV line, bad JSON record). Carries a
/// 1-based line number when one is known.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                      : std::move(message)),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that violates a domain contract (duplicate code,
/// unknown base, inconsistent arm set, mode mismatch).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& message) : std::runtime_error(message) {}
};

/// Bad configuration: thresholds out of order, empty catalog where one
/// is required, non-idempotent rule set.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

/// Filesystem-level failure (missing file, unwritable output).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& message) : std::runtime_error(message) {}
};

} // namespace drg

#endif
