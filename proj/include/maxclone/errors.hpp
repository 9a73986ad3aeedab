#pragma once

#include <stdexcept>
#include <string>

namespace maxclone {

// Malformed input: bad parameters, parse failures, arity mismatches.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A size guard tripped (relation cells, enumeration counts, closure budget).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal check that must hold did not (a derivation failed to replay,
// a preservation claim was refuted).
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace maxclone
