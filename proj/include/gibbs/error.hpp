#pragma once

#include <stdexcept>
#include <string>

namespace gibbs {

// Base of every error thrown by the library. `code()` is the stable
// machine-readable tag the CLI prints in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

// A configured resource cap (enumeration size, rejection budget) was hit.
class CapExceeded : public Error {
 public:
  explicit CapExceeded(const std::string& what) : Error("cap_exceeded", what) {}
};

// A series or measure that does not exist for the given parameters.
class NonConvergent : public Error {
 public:
  explicit NonConvergent(const std::string& what) : Error("non_convergent", what) {}
};

class Unreachable : public Error {
 public:
  explicit Unreachable(const std::string& what) : Error("unreachable", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace gibbs
