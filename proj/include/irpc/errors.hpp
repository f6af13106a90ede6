#pragma once

#include <stdexcept>
#include <string>

namespace irpc {

// Invalid argument, violated precondition, or out-of-range access.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A closed-form inversion whose denominator has collapsed (e.g. exposure far
// shorter than the heating time constant).
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The normal equations carry no information about the parameters.
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too few or collinear/coincident points for a geometric fit.
class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two trajectories share no timestamp.
class NoOverlapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or missing input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace irpc
