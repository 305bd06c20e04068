#pragma once

#include <span>

#include "fgplan/common.hpp"

namespace fgplan {

// Soft-max reductions. All evaluate through a shift by the maximum, so inputs
// at the reward floor neither overflow nor underflow to infinity. Empty input
// throws std::invalid_argument.

/// log sum_j exp(x_j).
double lse(std::span<const double> x);

/// (1/alpha) log sum_j exp(alpha x_j), alpha > 0.
/// Lies in [max x, max x + log(N)/alpha]; alpha = 1 reproduces lse exactly.
double g_alpha(std::span<const double> x, double alpha);

/// (sum_j x_j^alpha)^(1/alpha) for x_j >= 0, evaluated as
/// exp(g_alpha(log x, alpha)) with log 0 replaced by the floor.
double h_alpha(std::span<const double> x, double alpha,
               double log_floor = kLogFloor);

/// h_alpha accepts exponents in (0, 1) for experiments, outside the
/// alpha >= 1 range where it behaves as a soft maximum.
constexpr bool h_alpha_study_mode(double alpha) {
  return alpha > 0.0 && alpha < 1.0;
}

/// sum_i x_i e^{beta x_i} / sum_j e^{beta x_j}, beta >= 0; beta = 0 gives the
/// arithmetic mean exactly.
double r_beta(std::span<const double> x, double beta);

}  // namespace fgplan
