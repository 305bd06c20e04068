#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fgplan {

/// Stand-in for log(0) and for the reward of forbidden state-action pairs.
inline constexpr double kLogFloor = -1e6;

/// Values within this distance of a row maximum count as tied.
inline constexpr double kTieTolerance = 1e-9;

/// Malformed input document or out-of-domain parameter.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Steady-state iteration whose increments kept growing.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every candidate carries floor weight: the constraints are contradictory.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A brute-force evaluator was asked to enumerate more than its budget.
class OracleBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fgplan
