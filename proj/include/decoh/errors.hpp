#pragma once

#include <stdexcept>
#include <string>

namespace decoh {

// Input outside an operation's mathematical domain (non-Hermitian generator,
// unnormalized state, bad tolerance, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Keep-set of a partial trace or a bipartition cut that does not split the
// factor list into two nonempty parts.
class InvalidPartitionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A fast path was requested for a generator without the required structure.
class StructureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The dynamics left the assumed model form, e.g. branches of the correlated
// state mixed into each other.
class ModelViolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A conserved quantity drifted beyond its tolerance.
class NumericalInvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace decoh
