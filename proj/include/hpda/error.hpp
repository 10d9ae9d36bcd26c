#pragma once

#include <stdexcept>
#include <string>

namespace hpda {

// Violated precondition: bad parameters, infeasible inputs, malformed grids.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Reading or writing an external resource failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal consistency failure inside a protocol run (a construction bug).
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

}  // namespace hpda
