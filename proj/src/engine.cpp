#include "fgplan/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fgplan/softmax.hpp"

namespace fgplan {

Boundary Boundary::uninformative(const MdpModel& model) {
  return {std::vector<double>(model.n_states(), 0.0),
          std::vector<double>(model.n_states() * model.n_actions(), 0.0)};
}

Boundary Boundary::from_start(const MdpModel& model, std::size_t start) {
  if (start >= model.n_states()) throw std::invalid_argument("start state out of range");
  Boundary b = uninformative(model);
  std::fill(b.initial.begin(), b.initial.end(), model.log_floor());
  b.initial[start] = 0.0;
  return b;
}

Boundary& Boundary::require_final_state(const MdpModel& model, std::size_t state) {
  if (state >= model.n_states()) throw std::invalid_argument("final state out of range");
  terminal.assign(model.n_states() * model.n_actions(), model.log_floor());
  for (std::size_t a = 0; a < model.n_actions(); ++a) {
    terminal[state * model.n_actions() + a] = 0.0;
  }
  return *this;
}

void Boundary::normalize(const MdpModel& model) {
  if (initial.size() != model.n_states() ||
      terminal.size() != model.n_states() * model.n_actions()) {
    throw std::invalid_argument("boundary message shape does not match model");
  }
  const double floor = model.log_floor();
  auto clamp_all = [floor](std::vector<double>& msg, const char* what) {
    bool informative = false;
    for (double& x : msg) {
      if (std::isnan(x)) throw std::invalid_argument(std::string(what) + " is NaN");
      x = std::max(x, floor);
      if (std::isinf(x)) throw std::invalid_argument(std::string(what) + " is infinite");
      if (x > floor) informative = true;
    }
    if (!informative) {
      throw std::invalid_argument(std::string(what) + " is at the floor everywhere");
    }
  };
  clamp_all(initial, "initial message");
  clamp_all(terminal, "terminal message");
}

HorizonSolution backward_sweep(const MdpModel& model, const BackupRule& rule,
                               std::size_t horizon, Boundary boundary) {
  rule.validate();
  if (horizon == 0) throw std::invalid_argument("horizon must be at least 1");
  boundary.normalize(model);

  const double floor = model.log_floor();
  const double gamma = model.discount();
  const bool shift = rule.probabilistic();

  HorizonSolution sol;
  sol.rule = rule;
  sol.q.resize(horizon);
  sol.v.resize(horizon);
  sol.log_offset.assign(horizon, 0.0);

  const std::size_t last = horizon - 1;
  QTable q_last(model.n_states(), model.n_actions());
  for (std::size_t s = 0; s < model.n_states(); ++s) {
    for (std::size_t a = 0; a < model.n_actions(); ++a) {
      q_last(s, a) = std::max(
          model.reward_prime(s, a) + boundary.terminal[s * model.n_actions() + a], floor);
    }
  }
  sol.q[last] = std::move(q_last);
  sol.v[last] = backup_v(rule, sol.q[last]);
  if (shift) sol.log_offset[last] = shift_to_zero_max(sol.q[last], sol.v[last], floor);

  for (std::size_t t = last; t-- > 0;) {
    sol.q[t] = backup_q(rule, model, sol.v[t + 1]);
    sol.v[t] = backup_v(rule, sol.q[t]);
    const double m = shift ? shift_to_zero_max(sol.q[t], sol.v[t], floor) : 0.0;
    sol.log_offset[t] = gamma * sol.log_offset[t + 1] + m;
  }
  sol.boundary = std::move(boundary);
  return sol;
}

std::vector<VTable> forward_sweep(const MdpModel& model, const BackupRule& rule,
                                  std::size_t horizon, Boundary boundary) {
  rule.validate();
  if (horizon == 0) throw std::invalid_argument("horizon must be at least 1");
  boundary.normalize(model);

  const std::size_t S = model.n_states();
  const std::size_t A = model.n_actions();
  const double floor = model.log_floor();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  auto finish = [floor](std::vector<double>& f) {
    for (double& x : f) x = std::max(x, floor);
    const double m = *std::max_element(f.begin(), f.end());
    for (double& x : f) x = std::max(x - m, floor);
  };

  std::vector<VTable> out;
  out.reserve(horizon);
  std::vector<double> f = boundary.initial;
  finish(f);
  out.emplace_back(f);

  for (std::size_t t = 1; t < horizon; ++t) {
    // Message leaving the diverter towards the dynamics block, over (s, a).
    std::vector<double> w(S * A);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) w[s * A + a] = f[s] + model.reward_prime(s, a);
    }

    std::vector<double> next(S);
    switch (rule.family) {
      case Family::SumProduct:
      case Family::MaxProduct:
      case Family::SumMaxProduct: {
        std::vector<double> peak(S, kNegInf);
        for (std::size_t s = 0; s < S; ++s) {
          for (std::size_t a = 0; a < A; ++a) {
            for (const Successor& e : model.successors(s, a)) {
              peak[e.state] = std::max(peak[e.state], std::log(e.prob) + w[s * A + a]);
            }
          }
        }
        if (rule.family == Family::MaxProduct) {
          next = peak;
          break;
        }
        const double scale = rule.family == Family::SumMaxProduct ? rule.alpha : 1.0;
        std::vector<double> sum(S, 0.0);
        for (std::size_t s = 0; s < S; ++s) {
          for (std::size_t a = 0; a < A; ++a) {
            for (const Successor& e : model.successors(s, a)) {
              sum[e.state] +=
                  std::exp(scale * (std::log(e.prob) + w[s * A + a] - peak[e.state]));
            }
          }
        }
        for (std::size_t s = 0; s < S; ++s) {
          next[s] = sum[s] > 0.0 ? peak[s] + std::log(sum[s]) / scale : floor;
        }
        break;
      }
      case Family::DP:
      case Family::SoftDP:
      case Family::MaxRewEnt: {
        std::vector<double> expect(S, 0.0);
        std::vector<bool> reached(S, false);
        for (std::size_t s = 0; s < S; ++s) {
          for (std::size_t a = 0; a < A; ++a) {
            for (const Successor& e : model.successors(s, a)) {
              expect[e.state] += e.prob * w[s * A + a];
              reached[e.state] = true;
            }
          }
        }
        for (std::size_t s = 0; s < S; ++s) next[s] = reached[s] ? expect[s] : floor;
        break;
      }
    }
    finish(next);
    f = next;
    out.emplace_back(std::move(next));
  }
  return out;
}

HorizonSolution solve_horizon(const MdpModel& model, const BackupRule& rule,
                              std::size_t horizon, Boundary boundary) {
  HorizonSolution sol = backward_sweep(model, rule, horizon, boundary);
  sol.forward = forward_sweep(model, rule, horizon, std::move(boundary));
  return sol;
}

std::vector<std::vector<double>> posteriors(const HorizonSolution& sol) {
  if (sol.forward.size() != sol.horizon()) {
    throw std::invalid_argument("posteriors need the forward messages");
  }
  const double power =
      sol.rule.family == Family::SumMaxProduct ? sol.rule.alpha : 1.0;
  std::vector<std::vector<double>> out;
  out.reserve(sol.horizon());
  for (std::size_t t = 0; t < sol.horizon(); ++t) {
    const std::size_t S = sol.v[t].n_states();
    std::vector<double> joint(S);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < S; ++s) {
      joint[s] = sol.forward[t][s] + sol.v[t][s];
      best = std::max(best, joint[s]);
    }
    // f and V are each >= floor, so a feasible state sits far above 2 * floor.
    if (best <= 0.5 * kLogFloor) {
      throw InfeasibleError("posterior at step " + std::to_string(t + 1) +
                            " is at the floor everywhere: constraints contradict");
    }
    for (double& x : joint) x *= power;
    const double norm = lse(joint);
    for (double& x : joint) x = std::exp(x - norm);
    out.push_back(std::move(joint));
  }
  return out;
}

bool steady_state_normalizes(const MdpModel& model, const BackupRule& rule) {
  return rule.probabilistic() || model.discount() == 1.0;
}

SteadyState steady_state(const MdpModel& model, const BackupRule& rule, double tol,
                         std::size_t max_iter) {
  rule.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iter == 0) throw std::invalid_argument("max_iter must be at least 1");

  constexpr std::size_t kDivergenceWindow = 50;
  constexpr double kDivergenceGrowth = 10.0;

  const bool shift = steady_state_normalizes(model, rule);
  SteadyState out;
  out.v = VTable(model.n_states(), 0.0);
  auto& increments = out.report.increments;

  for (std::size_t k = 0; k < max_iter; ++k) {
    QTable q = backup_q(rule, model, out.v);
    VTable v = backup_v(rule, q);
    if (shift) shift_to_zero_max(q, v, model.log_floor());

    double change = 0.0;
    for (std::size_t s = 0; s < v.n_states(); ++s) {
      change = std::max(change, std::abs(v[s] - out.v[s]));
    }
    out.q = std::move(q);
    out.v = std::move(v);
    increments.push_back(change);

    if (change < tol) {
      out.report.terminated_by = Termination::Tolerance;
      break;
    }
    if (k >= kDivergenceWindow &&
        change > kDivergenceGrowth * increments[k - kDivergenceWindow]) {
      throw DivergenceError(rule.label() + " diverged at iteration " +
                            std::to_string(k + 1) + " (increment " +
                            std::to_string(change) + ")");
    }
  }
  out.report.iterations = increments.size();
  return out;
}

}  // namespace fgplan
