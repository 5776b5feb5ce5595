#pragma once

#include <stdexcept>
#include <string>

namespace dualscale {

enum class ErrorKind {
  InvalidInput,   // malformed scenario/allocation, bad indices
  Infeasible,     // no feasible point for a subproblem
  Unstable,       // a queue with utilization >= 1
  Numerical,      // zero service rate, stall, iteration caps
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dualscale
