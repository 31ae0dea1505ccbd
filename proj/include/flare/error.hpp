#pragma once

#include <stdexcept>
#include <string>

namespace flare {

// Bad user input: malformed files, missing fields, out-of-range options.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Invalid distribution or kernel parameters (as opposed to out-of-support data).
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A value outside the domain of a transform or function.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Linear algebra breakdown, failed initialization, and similar.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace flare
