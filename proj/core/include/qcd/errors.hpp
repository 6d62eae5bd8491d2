#pragma once

#include <stdexcept>

namespace qcd {

/// A parameter lies outside its documented domain (sigma2 <= 0, r <= 1, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The pre- and post-change laws coincide, so the requested quantity is undefined.
class DegenerateModel : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// False-alarm and latency levels with delta_f + delta_d >= 1.
class InfeasibleLevels : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A bound was queried outside the region where it holds (e.g. pre-change window too short).
class PreconditionViolated : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A detector was stepped after it had already declared a change.
class DetectorStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A run whose cost exceeds the default budget was requested without an explicit override.
class ExpensiveRunRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or non-finite input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qcd
