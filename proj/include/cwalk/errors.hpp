#pragma once

#include <stdexcept>
#include <string>

namespace cwalk {

// Malformed inputs: bad dimensions, non-unitary matrices, inconsistent configs.
struct ValidationError : std::invalid_argument {
  explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Structurally valid inputs outside an operation's domain (e.g. an index that
// does not exist in the state, or a zero vector where weights are undefined).
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// The operation is only defined for a specific state shape and got another.
struct UnsupportedScenario : std::invalid_argument {
  explicit UnsupportedScenario(const std::string& msg) : std::invalid_argument(msg) {}
};

// Exact oracles refuse instances beyond their size limits instead of grinding.
struct SizeLimitError : std::length_error {
  explicit SizeLimitError(const std::string& msg) : std::length_error(msg) {}
};

}  // namespace cwalk
