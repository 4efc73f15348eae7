#pragma once

#include <stdexcept>
#include <string>

namespace tailatlas {

/// Machine-readable failure categories. Everything user-facing that can go
/// wrong maps to one of these so callers (and the CLI) can react uniformly.
enum class ErrorKind {
  InvalidInput,        // malformed config or data violating a type invariant
  SingularPoint,       // orbit hit a partition breakpoint exactly
  WindowUnderflow,     // lattice window too small to contain any cycle
  InconclusiveWindow,  // window too small to resolve the decomposition
  HypothesisNotMet,    // operation requires a hypothesis the input lacks
  NotBMeasurable,      // fiber action depends on future coordinates
  Unsupported,         // input outside the implemented classification
  CertificationFailed, // restricted matrix not primitive
  SlowMixing,          // convergence certificate needs more matrix powers
  Tangency,            // billiard ray tangent to a scatterer
  Grazing,             // reflection with near-zero normal velocity
  HorizonEscape,       // free flight left the search region
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::SingularPoint: return "singular point";
    case ErrorKind::WindowUnderflow: return "window underflow";
    case ErrorKind::InconclusiveWindow: return "inconclusive, enlarge window";
    case ErrorKind::HypothesisNotMet: return "hypothesis not met";
    case ErrorKind::NotBMeasurable: return "not B-measurable";
    case ErrorKind::Unsupported: return "unsupported classification";
    case ErrorKind::CertificationFailed: return "exactness certification failed";
    case ErrorKind::SlowMixing: return "slow mixing, raise max_power";
    case ErrorKind::Tangency: return "tangent collision";
    case ErrorKind::Grazing: return "grazing reflection";
    case ErrorKind::HorizonEscape: return "horizon escape";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tailatlas
