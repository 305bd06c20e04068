#include "fgplan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace fgplan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_undiscounted(const MdpModel& model, const char* who) {
  if (model.discount() != 1.0) {
    throw std::invalid_argument(std::string(who) + " is defined for gamma = 1 only");
  }
}

void require_budget(std::size_t leaves, const char* who) {
  if (leaves > kOracleBudget) {
    throw OracleBudgetError(std::string(who) + ": enumeration exceeds " +
                            std::to_string(kOracleBudget) + " leaves");
  }
}

void require_shape(const MdpModel& model, std::size_t horizon, const Boundary& boundary) {
  if (horizon == 0) throw std::invalid_argument("oracle: horizon must be at least 1");
  if (boundary.initial.size() != model.n_states() ||
      boundary.terminal.size() != model.n_states() * model.n_actions()) {
    throw std::invalid_argument("oracle: boundary shape does not match model");
  }
}

// Odometer over (s_1, a_1, ..., s_T, a_T), s_1 most significant.
class SequenceCounter {
 public:
  SequenceCounter(std::size_t horizon, std::size_t n_states, std::size_t n_actions)
      : digits_(2 * horizon, 0), n_states_(n_states), n_actions_(n_actions) {}

  std::size_t state(std::size_t t) const { return digits_[2 * t]; }
  std::size_t action(std::size_t t) const { return digits_[2 * t + 1]; }

  bool next() {
    for (std::size_t i = digits_.size(); i-- > 0;) {
      const std::size_t radix = i % 2 == 0 ? n_states_ : n_actions_;
      if (++digits_[i] < radix) return true;
      digits_[i] = 0;
    }
    return false;
  }

 private:
  std::vector<std::size_t> digits_;
  std::size_t n_states_;
  std::size_t n_actions_;
};

double sequence_log_weight(const MdpModel& model, const Boundary& boundary,
                           const SequenceCounter& seq, std::size_t horizon) {
  double w = boundary.initial[seq.state(0)];
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t s = seq.state(t);
    const std::size_t a = seq.action(t);
    w += model.reward_prime(s, a);
    if (t + 1 < horizon) {
      const double p = model.transition(s, a, seq.state(t + 1));
      if (p <= 0.0) return kNegInf;
      w += std::log(p);
    }
  }
  const std::size_t last = horizon - 1;
  return w + boundary.terminal[seq.state(last) * model.n_actions() + seq.action(last)];
}

}  // namespace

std::size_t capped_power(std::size_t base, std::size_t exponent) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (base != 0 && out > kOracleBudget / base) return kOracleBudget + 1;
    out *= base;
  }
  return out;
}

std::vector<std::vector<double>> brute_marginals(const MdpModel& model, std::size_t horizon,
                                                 const Boundary& boundary, double power) {
  require_shape(model, horizon, boundary);
  require_undiscounted(model, "brute_marginals");
  if (!(power >= 1.0)) throw std::invalid_argument("brute_marginals: power must be >= 1");
  const std::size_t S = model.n_states();
  const std::size_t A = model.n_actions();
  require_budget(capped_power(S * A, horizon), "brute_marginals");

  double peak = kNegInf;
  {
    SequenceCounter seq(horizon, S, A);
    do {
      peak = std::max(peak, power * sequence_log_weight(model, boundary, seq, horizon));
    } while (seq.next());
  }
  if (!std::isfinite(peak)) throw InfeasibleError("brute_marginals: no sequence has weight");

  std::vector<std::vector<double>> marg(horizon, std::vector<double>(S, 0.0));
  SequenceCounter seq(horizon, S, A);
  do {
    const double w = power * sequence_log_weight(model, boundary, seq, horizon);
    if (w == kNegInf) continue;
    const double x = std::exp(w - peak);
    for (std::size_t t = 0; t < horizon; ++t) marg[t][seq.state(t)] += x;
  } while (seq.next());

  for (auto& m : marg) {
    double z = 0.0;
    for (double x : m) z += x;
    for (double& x : m) x /= z;
  }
  return marg;
}

std::vector<std::vector<double>> eliminate_marginals(const MdpModel& model,
                                                     std::size_t horizon,
                                                     const Boundary& boundary,
                                                     double power) {
  require_shape(model, horizon, boundary);
  require_undiscounted(model, "eliminate_marginals");
  if (!(power >= 1.0)) throw std::invalid_argument("eliminate_marginals: power must be >= 1");
  const std::size_t S = model.n_states();
  const std::size_t A = model.n_actions();

  auto normalise = [](std::vector<long double>& v) {
    long double z = 0.0L;
    for (long double x : v) z += x;
    if (z > 0.0L) {
      for (long double& x : v) x /= z;
    }
  };
  auto local = [&](std::size_t t, std::size_t s, std::size_t a) -> long double {
    double r = model.reward_prime(s, a);
    if (t + 1 == horizon) r += boundary.terminal[s * A + a];
    return std::exp(static_cast<long double>(power) * r);
  };
  auto step = [&](std::size_t s, std::size_t a, std::size_t next) -> long double {
    return std::pow(static_cast<long double>(model.transition(s, a, next)),
                    static_cast<long double>(power));
  };

  std::vector<std::vector<long double>> fwd(horizon, std::vector<long double>(S, 0.0L));
  const double top = *std::max_element(boundary.initial.begin(), boundary.initial.end());
  for (std::size_t s = 0; s < S; ++s) {
    fwd[0][s] = std::exp(static_cast<long double>(power) * (boundary.initial[s] - top));
  }
  normalise(fwd[0]);
  for (std::size_t t = 0; t + 1 < horizon; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        const long double carry = fwd[t][s] * local(t, s, a);
        for (std::size_t n = 0; n < S; ++n) fwd[t + 1][n] += carry * step(s, a, n);
      }
    }
    normalise(fwd[t + 1]);
  }

  std::vector<std::vector<long double>> bwd(horizon, std::vector<long double>(S, 0.0L));
  for (std::size_t t = horizon; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        long double tail = 1.0L;
        if (t + 1 < horizon) {
          tail = 0.0L;
          for (std::size_t n = 0; n < S; ++n) tail += step(s, a, n) * bwd[t + 1][n];
        }
        bwd[t][s] += local(t, s, a) * tail;
      }
    }
    normalise(bwd[t]);
  }

  std::vector<std::vector<double>> marg(horizon, std::vector<double>(S));
  for (std::size_t t = 0; t < horizon; ++t) {
    std::vector<long double> m(S);
    for (std::size_t s = 0; s < S; ++s) m[s] = fwd[t][s] * bwd[t][s];
    normalise(m);
    for (std::size_t s = 0; s < S; ++s) marg[t][s] = static_cast<double>(m[s]);
  }
  return marg;
}

MapSequence brute_map(const MdpModel& model, std::size_t horizon, const Boundary& boundary) {
  require_shape(model, horizon, boundary);
  require_undiscounted(model, "brute_map");
  const std::size_t S = model.n_states();
  const std::size_t A = model.n_actions();
  require_budget(capped_power(S * A, horizon), "brute_map");

  MapSequence best;
  best.log_weight = kNegInf;
  SequenceCounter seq(horizon, S, A);
  do {
    const double w = sequence_log_weight(model, boundary, seq, horizon);
    if (w == kNegInf) continue;
    if (w > best.log_weight + kTieTolerance) {
      best.log_weight = w;
      best.multiplicity = 1;
      best.states.assign(horizon, 0);
      best.actions.assign(horizon, 0);
      for (std::size_t t = 0; t < horizon; ++t) {
        best.states[t] = seq.state(t);
        best.actions[t] = seq.action(t);
      }
    } else if (w >= best.log_weight - kTieTolerance) {
      ++best.multiplicity;
    }
  } while (seq.next());
  if (best.multiplicity == 0) throw InfeasibleError("brute_map: no sequence has weight");
  return best;
}

std::vector<double> evaluate_policy_exact(const MdpModel& model, const StepPolicy& policy) {
  const std::size_t S = model.n_states();
  std::vector<double> out(S, 0.0);
  for (std::size_t start = 0; start < S; ++start) {
    std::vector<double> dist(S, 0.0);
    dist[start] = 1.0;
    double weight = 1.0;
    double value = 0.0;
    for (std::size_t t = 0; t < policy.size(); ++t) {
      std::vector<double> next(S, 0.0);
      for (std::size_t s = 0; s < S; ++s) {
        if (dist[s] == 0.0) continue;
        const std::size_t a = policy[t][s];
        value += weight * dist[s] * model.reward_prime(s, a);
        for (const Successor& e : model.successors(s, a)) next[e.state] += dist[s] * e.prob;
      }
      dist = std::move(next);
      weight *= model.discount();
    }
    out[start] = value;
  }
  return out;
}

std::vector<double> brute_dp_value(const MdpModel& model, std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("brute_dp_value: horizon must be at least 1");
  const std::size_t S = model.n_states();
  const std::size_t A = model.n_actions();
  const std::size_t count = capped_power(A, S * horizon);
  require_budget(count, "brute_dp_value");

  std::vector<double> best(S, kNegInf);
  StepPolicy policy(horizon, std::vector<std::size_t>(S, 0));
  for (std::size_t code = 0; code < count; ++code) {
    std::size_t rest = code;
    for (std::size_t t = 0; t < horizon; ++t) {
      for (std::size_t s = 0; s < S; ++s) {
        policy[t][s] = rest % A;
        rest /= A;
      }
    }
    const auto value = evaluate_policy_exact(model, policy);
    for (std::size_t s = 0; s < S; ++s) best[s] = std::max(best[s], value[s]);
  }
  return best;
}

double rew_ent_objective(const MdpModel& model, double alpha,
                         std::span<const double> initial_prob,
                         const std::vector<std::vector<double>>& policy) {
  const std::size_t S = model.n_states();
  std::vector<double> tail(S, 0.0);
  for (std::size_t t = policy.size(); t-- > 0;) {
    std::vector<double> here(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      const double x = policy[t][s];
      // log pi_alpha for the two actions.
      const double la = x > 0.0 ? alpha * std::log(x) : kNegInf;
      const double lb = x < 1.0 ? alpha * std::log1p(-x) : kNegInf;
      const double m = std::max(la, lb);
      const double norm = m + std::log(std::exp(la - m) + std::exp(lb - m));
      const double log_q[2] = {la - norm, lb - norm};
      for (std::size_t a = 0; a < 2; ++a) {
        const double q = std::exp(log_q[a]);
        if (q == 0.0) continue;
        double future = 0.0;
        for (const Successor& e : model.successors(s, a)) future += e.prob * tail[e.state];
        here[s] += q * (model.reward_prime(s, a) - log_q[a] / alpha +
                        model.discount() * future);
      }
    }
    tail = std::move(here);
  }
  double value = 0.0;
  for (std::size_t s = 0; s < S; ++s) value += initial_prob[s] * tail[s];
  return value;
}

RewEntOptimum brute_rew_ent(const MdpModel& model, std::size_t horizon, double alpha,
                            std::span<const double> initial_prob) {
  if (model.n_states() != 2 || model.n_actions() != 2 || horizon == 0 || horizon > 2) {
    throw std::invalid_argument("brute_rew_ent: needs 2 states, 2 actions and T <= 2");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("brute_rew_ent: alpha must be positive");
  }
  if (initial_prob.size() != 2) throw std::invalid_argument("brute_rew_ent: bad p(s_1)");

  const std::size_t dims = 2 * horizon;
  std::vector<double> x(dims, 0.5);
  auto objective = [&](const std::vector<double>& params) {
    std::vector<std::vector<double>> policy(horizon, std::vector<double>(2));
    for (std::size_t i = 0; i < dims; ++i) policy[i / 2][i % 2] = params[i];
    return rew_ent_objective(model, alpha, initial_prob, policy);
  };

  // Coarse joint grid.
  constexpr std::size_t kCoarse = 21;
  const std::size_t points = capped_power(kCoarse, dims);
  std::vector<double> coarse(points);
  double best = kNegInf;
  std::vector<double> trial(dims);
  for (std::size_t code = 0; code < points; ++code) {
    std::size_t rest = code;
    for (std::size_t i = 0; i < dims; ++i) {
      trial[i] = static_cast<double>(rest % kCoarse) / (kCoarse - 1);
      rest /= kCoarse;
    }
    coarse[code] = objective(trial);
    if (coarse[code] > best) {
      best = coarse[code];
      x = trial;
    }
  }

  // Coordinate scans at 1e-3, then golden-section refinement inside the cell.
  constexpr std::size_t kFine = 1000;
  constexpr double kGolden = 0.6180339887498949;
  for (int sweep = 0; sweep < 100; ++sweep) {
    const double before = best;
    for (std::size_t i = 0; i < dims; ++i) {
      trial = x;
      for (std::size_t k = 0; k <= kFine; ++k) {
        trial[i] = static_cast<double>(k) / kFine;
        const double f = objective(trial);
        if (f > best) {
          best = f;
          x[i] = trial[i];
        }
      }
      double lo = std::max(0.0, x[i] - 1.0 / kFine);
      double hi = std::min(1.0, x[i] + 1.0 / kFine);
      trial = x;
      auto at = [&](double v) {
        trial[i] = v;
        return objective(trial);
      };
      double c = hi - kGolden * (hi - lo);
      double d = lo + kGolden * (hi - lo);
      double fc = at(c);
      double fd = at(d);
      while (hi - lo > 1e-13) {
        if (fc > fd) {
          hi = d;
          d = c;
          fd = fc;
          c = hi - kGolden * (hi - lo);
          fc = at(c);
        } else {
          lo = c;
          c = d;
          fc = fd;
          d = lo + kGolden * (hi - lo);
          fd = at(d);
        }
      }
      const double mid = 0.5 * (lo + hi);
      const double fm = at(mid);
      if (fm > best) {
        best = fm;
        x[i] = mid;
      }
    }
    if (best - before <= 1e-15) break;
  }

  RewEntOptimum out;
  out.value = best;
  out.action0.assign(horizon, std::vector<double>(2));
  for (std::size_t i = 0; i < dims; ++i) out.action0[i / 2][i % 2] = x[i];
  out.plateau_points = static_cast<std::size_t>(
      std::count_if(coarse.begin(), coarse.end(), [&](double f) { return f >= best - 1e-6; }));
  return out;
}

MdpModel random_model(std::uint64_t seed, std::size_t n_states, std::size_t n_actions,
                      double discount) {
  if (n_states == 0 || n_actions == 0) {
    throw std::invalid_argument("random_model: need at least one state and action");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> dense(n_states * n_actions * n_states, 0.0);
  for (std::size_t row = 0; row < n_states * n_actions; ++row) {
    double* p = dense.data() + row * n_states;
    double total = 0.0;
    for (std::size_t n = 0; n < n_states; ++n) {
      if (unit(rng) < 1.0 / 3.0) continue;
      p[n] = 0.05 + unit(rng);
      total += p[n];
    }
    if (total == 0.0) {
      p[rng() % n_states] = 1.0;
      total = 1.0;
    }
    for (std::size_t n = 0; n < n_states; ++n) p[n] /= total;
  }
  std::vector<double> reward(n_states * n_actions);
  for (double& r : reward) r = -3.0 * unit(rng);
  std::vector<double> prior(n_actions);
  double total = 0.0;
  for (double& x : prior) {
    x = 0.1 + unit(rng);
    total += x;
  }
  for (double& x : prior) x = std::log(x / total);
  return MdpModel(n_states, n_actions, dense, std::move(reward), std::move(prior), discount);
}

}  // namespace fgplan
