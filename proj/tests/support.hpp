#pragma once

// shared bits for the unit tests

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fgplan/model.hpp"

namespace testing_support {

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo,
                                         double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return x;
}

// deterministic kernel: action a from state s goes to (s + a) mod n
inline fgplan::MdpModel shift_chain(std::size_t n_states, std::size_t n_actions,
                                    std::vector<double> reward, double discount = 1.0) {
  std::vector<std::vector<fgplan::Successor>> rows;
  for (std::size_t s = 0; s < n_states; ++s)
    for (std::size_t a = 0; a < n_actions; ++a) rows.push_back({{(s + a) % n_states, 1.0}});
  std::vector<double> prior(n_actions, -std::log(static_cast<double>(n_actions)));
  return fgplan::MdpModel(n_states, n_actions, rows, std::move(reward), prior, discount);
}

inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-300});
    d = std::max(d, std::abs(a[i] - b[i]) / scale);
  }
  return d;
}

}  // namespace testing_support
