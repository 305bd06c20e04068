#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fgplan/engine.hpp"
#include "fgplan/model.hpp"

namespace fgplan {

// Exhaustive evaluators for tiny instances. They share no code with the
// engine's recursions and exist to certify them.

/// Leaf budget for every enumeration below.
inline constexpr std::size_t kOracleBudget = 1'000'000;

/// base^exponent, or kOracleBudget + 1 once it exceeds the budget.
std::size_t capped_power(std::size_t base, std::size_t exponent);

/// Exact per-step state marginals of p(s_1 a_1 ... s_T a_T | K)^power by
/// enumerating every (s, a) sequence in the log domain. Needs gamma = 1 and
/// (|S| |A|)^T within budget; throws OracleBudgetError otherwise.
std::vector<std::vector<double>> brute_marginals(const MdpModel& model, std::size_t horizon,
                                                 const Boundary& boundary,
                                                 double power = 1.0);

/// Same marginals by forward/backward elimination in linear space with
/// per-step rescaling, as a second opinion on brute_marginals.
std::vector<std::vector<double>> eliminate_marginals(const MdpModel& model,
                                                     std::size_t horizon,
                                                     const Boundary& boundary,
                                                     double power = 1.0);

struct MapSequence {
  std::vector<std::size_t> states;
  std::vector<std::size_t> actions;
  double log_weight = 0.0;
  std::size_t multiplicity = 0;  // sequences within kTieTolerance of the best
};

/// Highest-weight (s, a) sequence; the lexicographically smallest among ties
/// in the order s_1, a_1, s_2, ... Needs gamma = 1.
MapSequence brute_map(const MdpModel& model, std::size_t horizon, const Boundary& boundary);

/// Time-indexed deterministic policy: actions[t][s].
using StepPolicy = std::vector<std::vector<std::size_t>>;

/// E[sum_t gamma^(t-1) R'(s_t, a_t) | s_1 = s] for each start s, by pushing
/// the state distribution through the chain.
std::vector<double> evaluate_policy_exact(const MdpModel& model, const StepPolicy& policy);

/// Per-start maximum of evaluate_policy_exact over all |A|^(|S| T)
/// deterministic policies.
std::vector<double> brute_dp_value(const MdpModel& model, std::size_t horizon);

struct RewEntOptimum {
  double value = 0.0;
  /// pi[t][s] = probability of action 0 at the optimum.
  std::vector<std::vector<double>> action0;
  /// Coarse-grid points whose objective is within 1e-6 of the optimum.
  std::size_t plateau_points = 0;
};

/// E over p-hat of sum_t gamma^(t-1) (R'(s_t,a_t) - (1/alpha) log pi_alpha(a_t|s_t)),
/// where p-hat draws actions from pi_alpha = pi^alpha / sum pi^alpha and
/// s_1 from initial_prob. policy[t][s] is pi(action 0 | s).
double rew_ent_objective(const MdpModel& model, double alpha,
                         std::span<const double> initial_prob,
                         const std::vector<std::vector<double>>& policy);

/// Maximises rew_ent_objective over per-(t, s) policies by a coarse joint grid,
/// coordinate scans at step 1e-3 and golden-section refinement. Only
/// |S| = |A| = 2 and T <= 2; throws std::invalid_argument otherwise.
RewEntOptimum brute_rew_ent(const MdpModel& model, std::size_t horizon, double alpha,
                            std::span<const double> initial_prob);

/// Small random model for oracle runs: roughly a third of the transition
/// entries are zero (every row keeps at least one), rewards are uniform in
/// [-3, 0] and the action prior is a random distribution.
MdpModel random_model(std::uint64_t seed, std::size_t n_states, std::size_t n_actions,
                      double discount = 1.0);

}  // namespace fgplan
