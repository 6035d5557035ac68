#pragma once

#include <stdexcept>
#include <string>

namespace tcpsync {

// Invalid argument for a model function (non-positive window, probability outside its range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A well-formed request the models do not cover (asymmetric coupling, n != 1 closed forms, ...).
class UnsupportedConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures of a numerical procedure on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoRoot : public NumericalError {
 public:
  NoRoot(const std::string& what, double lo, double hi)
      : NumericalError(what), bracket_lo(lo), bracket_hi(hi) {}
  double bracket_lo;
  double bracket_hi;
};

class NoConvergence : public NumericalError {
 public:
  NoConvergence(const std::string& what, double last_iterate, double last_residual)
      : NumericalError(what), last_iterate(last_iterate), last_residual(last_residual) {}
  double last_iterate;
  double last_residual;
};

// The fixed-step integrator drove a window to the positivity floor.
class IntegrationAborted : public NumericalError {
 public:
  IntegrationAborted(const std::string& what, double time) : NumericalError(what), time(time) {}
  double time;
};

class HorizonTooShort : public NumericalError {
 public:
  HorizonTooShort(const std::string& what, double required_seconds)
      : NumericalError(what), required_seconds(required_seconds) {}
  double required_seconds;
};

}  // namespace tcpsync
