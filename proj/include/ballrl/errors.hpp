#pragma once

#include <stdexcept>
#include <string>

namespace ballrl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A policy returned an action outside the action set of the queried state.
class MembershipViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class RejectionBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class CertificationFailure : public Error {
 public:
  using Error::Error;
};

// Closed-form and dynamic-programming optimal values disagree.
class DisagreementError : public Error {
 public:
  using Error::Error;
};

class IterationBoundExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace ballrl

namespace ballrl {

// An internal consistency check failed (budget audit, negative gap).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace ballrl
