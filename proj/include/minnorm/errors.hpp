#pragma once

#include <stdexcept>
#include <string>

namespace minnorm {

// Malformed arguments: dimension mismatches, nonpositive weights or penalties.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Arguments outside the region where a closed-form risk formula is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical procedure failed to produce a certified answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data-driven estimate cannot be formed (e.g. zero estimated noise level).
class EstimateUndefinedError : public SolverError {
 public:
  EstimateUndefinedError(const std::string& what, std::string diagnostics)
      : SolverError(what), diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

}  // namespace minnorm
