#pragma once

#include <stdexcept>
#include <string>

namespace foldscan {

// Runtime failure caused by inputs (files, data), as opposed to API misuse.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal consistency check failed; indicates a bug, never bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace foldscan
