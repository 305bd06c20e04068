#include "fgplan/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace fgplan {

namespace {

struct Pick {
  std::size_t index = 0;
  double value = -std::numeric_limits<double>::infinity();
  std::size_t ties = 0;
};

Pick argmax_with_ties(std::span<const double> x) {
  Pick p;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > p.value) {
      p.value = x[i];
      p.index = i;
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= p.value - kTieTolerance) {
      if (p.ties == 0) p.index = i;
      ++p.ties;
    }
  }
  return p;
}

bool contains(std::span<const std::size_t> goals, std::size_t s) {
  return std::find(goals.begin(), goals.end(), s) != goals.end();
}

std::size_t likeliest_successor(const MdpModel& model, std::size_t s, std::size_t a) {
  const auto row = model.successors(s, a);
  std::size_t best = row.front().state;
  double p = row.front().prob;
  for (const Successor& e : row) {
    if (e.prob > p) {
      p = e.prob;
      best = e.state;
    }
  }
  return best;
}

void require_feasible(const PolicyTable& policy, std::size_t s, std::size_t step) {
  if (policy.infeasible(s)) {
    throw InfeasibleError("state " + std::to_string(s) + " at step " +
                          std::to_string(step + 1) + " has no feasible action");
  }
}

}  // namespace

PolicyTable::PolicyTable(std::size_t n_states, std::size_t n_actions, PolicyMode mode)
    : n_states_(n_states), n_actions_(n_actions), mode_(mode),
      probs_(n_states * n_actions, 0.0), best_(n_states, 0), ties_(n_states, 1),
      infeasible_(n_states, 0) {}

PolicyTable extract_policy(const QTable& q, const VTable& v, PolicyMode mode,
                           double log_floor) {
  if (q.n_states() != v.n_states() || q.n_actions() == 0) {
    throw std::invalid_argument("extract_policy: Q and V shapes do not match");
  }
  PolicyTable out(q.n_states(), q.n_actions(), mode);
  const std::size_t A = q.n_actions();
  for (std::size_t s = 0; s < q.n_states(); ++s) {
    const auto row = q.row(s);
    const Pick best = argmax_with_ties(row);
    out.best_[s] = best.index;
    out.ties_[s] = best.ties;
    double* probs = out.probs_.data() + s * A;
    if (best.value <= log_floor) {
      out.infeasible_[s] = 1;
      std::fill(probs, probs + A, 1.0 / static_cast<double>(A));
      continue;
    }
    if (mode == PolicyMode::HardArgmax) {
      probs[best.index] = 1.0;
      continue;
    }
    // exp(Q - V) renormalised; subtracting max Q instead of V only changes
    // the constant that the normalisation removes.
    double total = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      probs[a] = std::exp(row[a] - best.value);
      total += probs[a];
    }
    for (std::size_t a = 0; a < A; ++a) probs[a] /= total;
  }
  return out;
}

PolicyTable tempered_policy(const BackupRule& rule, const QTable& q, const VTable& v,
                            double log_floor) {
  double k = 1.0;
  if (rule.family == Family::SumMaxProduct || rule.family == Family::MaxRewEnt) {
    k = rule.alpha;
  } else if (rule.family == Family::SoftDP) {
    k = rule.beta;
  }
  PolicyTable out = extract_policy(q, v, PolicyMode::Soft, log_floor);
  out.mode_ = PolicyMode::Tempered;
  const std::size_t A = q.n_actions();
  for (std::size_t s = 0; s < q.n_states(); ++s) {
    if (out.infeasible_[s]) continue;
    const auto row = q.row(s);
    const double top = row[out.best_[s]];
    double* probs = out.probs_.data() + s * A;
    double total = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      probs[a] = std::exp(k * (row[a] - top));
      total += probs[a];
    }
    for (std::size_t a = 0; a < A; ++a) probs[a] /= total;
  }
  return out;
}

double mean_entropy(const PolicyTable& policy) {
  if (policy.n_states() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t s = 0; s < policy.n_states(); ++s) {
    for (double p : policy.row(s)) {
      if (p > 0.0) sum -= p * std::log(p);
    }
  }
  return sum / static_cast<double>(policy.n_states());
}

DecodedPath parallel_decode(const MdpModel& model,
                            const std::vector<std::vector<double>>& posteriors) {
  if (posteriors.empty()) throw std::invalid_argument("parallel_decode: no posteriors");
  DecodedPath path;
  path.mode = DecodeMode::Parallel;
  for (const auto& post : posteriors) {
    if (post.size() != model.n_states()) {
      throw std::invalid_argument("parallel_decode: posterior shape does not match model");
    }
    const Pick p = argmax_with_ties(post);
    path.states.push_back(p.index);
    path.max_tie_multiplicity = std::max(path.max_tie_multiplicity, p.ties);
  }
  for (std::size_t t = 0; t + 1 < path.states.size(); ++t) {
    bool linked = false;
    for (std::size_t a = 0; a < model.n_actions() && !linked; ++a) {
      linked = model.transition(path.states[t], a, path.states[t + 1]) > 0.0;
    }
    if (!linked) {
      path.connected = false;
      break;
    }
  }
  return path;
}

DecodedPath progressive_decode(const MdpModel& model, const HorizonSolution& sol,
                               const std::vector<PolicyTable>& policies) {
  const std::size_t T = sol.horizon();
  if (T == 0 || policies.size() != T) {
    throw std::invalid_argument("progressive_decode: need one policy per step");
  }
  const double floor = model.log_floor();
  const double threshold = 0.5 * floor;

  DecodedPath path;
  path.mode = DecodeMode::Progressive;

  std::vector<double> start(model.n_states());
  for (std::size_t s = 0; s < model.n_states(); ++s) {
    const double f = sol.forward.empty() ? sol.boundary.initial[s] : sol.forward[0][s];
    start[s] = f + sol.v[0][s];
  }
  const Pick first = argmax_with_ties(start);
  if (first.value <= threshold) {
    throw InfeasibleError("no feasible first state: constraints contradict");
  }
  std::size_t s = first.index;
  path.states.push_back(s);
  path.max_tie_multiplicity = first.ties;

  for (std::size_t t = 0; t < T; ++t) {
    require_feasible(policies[t], s, t);
    const std::size_t a = policies[t].best_action(s);
    path.actions.push_back(a);
    path.max_tie_multiplicity =
        std::max(path.max_tie_multiplicity, policies[t].tie_multiplicity(s));
    if (t + 1 == T) break;

    const auto row = model.successors(s, a);
    std::vector<double> scores;
    scores.reserve(row.size());
    for (const Successor& e : row) scores.push_back(std::log(e.prob) + sol.v[t + 1][e.state]);
    const Pick next = argmax_with_ties(scores);
    if (row.empty() || next.value <= threshold) {
      throw InfeasibleError("no feasible successor at step " + std::to_string(t + 2));
    }
    s = row[next.index].state;
    path.states.push_back(s);
    path.max_tie_multiplicity = std::max(path.max_tie_multiplicity, next.ties);
  }
  return path;
}

DecodedPath progressive_decode(const MdpModel& model, const HorizonSolution& sol) {
  std::vector<PolicyTable> policies;
  policies.reserve(sol.horizon());
  for (std::size_t t = 0; t < sol.horizon(); ++t) {
    policies.push_back(
        extract_policy(sol.q[t], sol.v[t], PolicyMode::Soft, model.log_floor()));
  }
  return progressive_decode(model, sol, policies);
}

DecodedPath greedy_rollout(const MdpModel& model, const PolicyTable& policy,
                           std::size_t start, std::size_t max_steps,
                           std::span<const std::size_t> goals) {
  if (start >= model.n_states()) throw std::invalid_argument("rollout start out of range");
  DecodedPath path;
  path.mode = DecodeMode::Rollout;
  std::size_t s = start;
  path.states.push_back(s);
  path.goal_reached = contains(goals, s);
  for (std::size_t k = 0; k < max_steps && !path.goal_reached; ++k) {
    require_feasible(policy, s, k);
    const std::size_t a = policy.best_action(s);
    path.max_tie_multiplicity = std::max(path.max_tie_multiplicity, policy.tie_multiplicity(s));
    s = likeliest_successor(model, s, a);
    path.actions.push_back(a);
    path.states.push_back(s);
    path.goal_reached = contains(goals, s);
  }
  return path;
}

DecodedPath sampled_rollout(const MdpModel& model, const PolicyTable& policy,
                            std::size_t start, std::size_t max_steps,
                            std::uint64_t seed, std::span<const std::size_t> goals) {
  if (start >= model.n_states()) throw std::invalid_argument("rollout start out of range");
  std::mt19937_64 rng(seed);
  DecodedPath path;
  path.mode = DecodeMode::Rollout;
  std::size_t s = start;
  path.states.push_back(s);
  path.goal_reached = contains(goals, s);
  for (std::size_t k = 0; k < max_steps && !path.goal_reached; ++k) {
    require_feasible(policy, s, k);
    const auto pi = policy.row(s);
    std::discrete_distribution<std::size_t> pick_action(pi.begin(), pi.end());
    const std::size_t a = pick_action(rng);
    const auto row = model.successors(s, a);
    std::vector<double> weights;
    for (const Successor& e : row) weights.push_back(e.prob);
    std::discrete_distribution<std::size_t> pick_next(weights.begin(), weights.end());
    s = row[pick_next(rng)].state;
    path.actions.push_back(a);
    path.states.push_back(s);
    path.goal_reached = contains(goals, s);
  }
  return path;
}

double path_log_weight(const MdpModel& model, const Boundary& boundary,
                       const DecodedPath& path) {
  if (path.states.empty() || path.actions.size() != path.states.size()) {
    throw std::invalid_argument("path_log_weight: need one action per state");
  }
  const double floor = model.log_floor();
  const std::size_t A = model.n_actions();
  const std::size_t T = path.states.size();
  double w = boundary.initial[path.states[0]];
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t s = path.states[t];
    const std::size_t a = path.actions[t];
    w += model.reward_prime(s, a);
    if (t + 1 < T) {
      const double p = model.transition(s, a, path.states[t + 1]);
      w += p > 0.0 ? std::log(p) : floor;
    }
  }
  return w + boundary.terminal[path.states[T - 1] * A + path.actions[T - 1]];
}

}  // namespace fgplan
