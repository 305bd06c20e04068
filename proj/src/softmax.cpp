#include "fgplan/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fgplan {

namespace {

void require_input(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("soft-max of an empty vector");
  for (double v : x) {
    if (std::isnan(v)) throw std::invalid_argument("soft-max input is NaN");
  }
}

double max_of(std::span<const double> x) {
  return *std::max_element(x.begin(), x.end());
}

}  // namespace

double lse(std::span<const double> x) {
  require_input(x);
  const double m = max_of(x);
  if (std::isinf(m)) return m;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - m);
  return m + std::log(sum);
}

double g_alpha(std::span<const double> x, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("g_alpha needs alpha > 0");
  require_input(x);
  const double m = max_of(x);
  if (std::isinf(m)) return m;
  // Shifting before scaling keeps alpha * (x - m) <= 0 for any alpha.
  double sum = 0.0;
  for (double v : x) sum += std::exp(alpha * (v - m));
  return m + std::log(sum) / alpha;
}

double h_alpha(std::span<const double> x, double alpha, double log_floor) {
  if (!(alpha > 0.0)) throw std::invalid_argument("h_alpha needs alpha > 0");
  require_input(x);
  std::vector<double> logs;
  logs.reserve(x.size());
  for (double v : x) {
    if (v < 0.0) throw std::invalid_argument("h_alpha input is negative");
    logs.push_back(v == 0.0 ? log_floor : std::log(v));
  }
  return std::exp(g_alpha(logs, alpha));
}

double r_beta(std::span<const double> x, double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("r_beta needs beta >= 0");
  require_input(x);
  const double m = max_of(x);
  if (std::isinf(m)) return m;
  double num = 0.0;
  double den = 0.0;
  for (double v : x) {
    const double w = beta == 0.0 ? 1.0 : std::exp(beta * (v - m));
    num += w * v;
    den += w;
  }
  return num / den;
}

}  // namespace fgplan
