#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fgplan/backups.hpp"
#include "fgplan/engine.hpp"
#include "fgplan/model.hpp"

namespace fgplan {

enum class PolicyMode {
  Soft,        // pi(a|s) proportional to exp(Q(s,a) - V(s))
  HardArgmax,  // all mass on the lowest-index maximiser of Q(s,.)
  Tempered,    // proportional to exp(k (Q(s,a) - V(s))), k the rule's parameter
};

/// pi(a|s) over (s, a), with per-row tie counts of the maximum of Q.
class PolicyTable {
 public:
  PolicyTable() = default;
  PolicyTable(std::size_t n_states, std::size_t n_actions, PolicyMode mode);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  PolicyMode mode() const { return mode_; }

  double operator()(std::size_t s, std::size_t a) const {
    return probs_[s * n_actions_ + a];
  }
  std::span<const double> row(std::size_t s) const {
    return {probs_.data() + s * n_actions_, n_actions_};
  }
  const std::vector<double>& values() const { return probs_; }

  /// Lowest-index action whose Q lies within kTieTolerance of the row maximum.
  std::size_t best_action(std::size_t s) const { return best_[s]; }
  /// Number of actions tied at the maximum of Q(s,.).
  std::size_t tie_multiplicity(std::size_t s) const { return ties_[s]; }
  /// Row whose Q entries all sit at the floor; its probabilities are uniform.
  bool infeasible(std::size_t s) const { return infeasible_[s] != 0; }

 private:
  friend PolicyTable extract_policy(const QTable&, const VTable&, PolicyMode,
                                    double);
  friend PolicyTable tempered_policy(const BackupRule&, const QTable&, const VTable&,
                                     double);

  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  PolicyMode mode_ = PolicyMode::Soft;
  std::vector<double> probs_;
  std::vector<std::size_t> best_;
  std::vector<std::size_t> ties_;
  std::vector<char> infeasible_;
};

/// Throws std::invalid_argument on shape mismatch. Rows whose Q is at the
/// floor everywhere are flagged infeasible instead of throwing; decoders
/// raise InfeasibleError when they step onto one.
PolicyTable extract_policy(const QTable& q, const VTable& v,
                           PolicyMode mode = PolicyMode::Soft,
                           double log_floor = kLogFloor);

/// Action distribution at the rule's own soft-max sharpness: k = alpha for
/// Sum/Max and MaxRewEnt (the pi_alpha that weights the reward/entropy
/// objective), k = beta for SoftDP, k = 1 otherwise.
PolicyTable tempered_policy(const BackupRule& rule, const QTable& q, const VTable& v,
                            double log_floor = kLogFloor);

/// Mean over states of the row entropy, natural log.
double mean_entropy(const PolicyTable& policy);

enum class DecodeMode { Parallel, Progressive, Rollout };

struct DecodedPath {
  std::vector<std::size_t> states;
  std::vector<std::size_t> actions;  // empty for the parallel S-only decode
  DecodeMode mode = DecodeMode::Rollout;
  bool connected = true;
  bool goal_reached = false;
  std::size_t max_tie_multiplicity = 1;  // over every argmax taken
};

/// Independent argmax of each step's posterior. `connected` is true iff every
/// consecutive pair is linked by some action with nonzero probability.
DecodedPath parallel_decode(const MdpModel& model,
                            const std::vector<std::vector<double>>& posteriors);

/// s1 = argmax f_1 + V_1, then a_t = argmax pi_t(.|s_t) and
/// s_{t+1} = argmax log p(s|s_t,a_t) + V_{t+1}(s). Uses the forward message
/// when present and the boundary's initial message otherwise.
DecodedPath progressive_decode(const MdpModel& model, const HorizonSolution& sol,
                               const std::vector<PolicyTable>& policies);
/// Same, with soft policies extracted from sol.
DecodedPath progressive_decode(const MdpModel& model, const HorizonSolution& sol);

/// Argmax walk under a stationary policy and the most likely successor,
/// stopping on a goal state or after max_steps moves.
DecodedPath greedy_rollout(const MdpModel& model, const PolicyTable& policy,
                           std::size_t start, std::size_t max_steps,
                           std::span<const std::size_t> goals = {});

/// As greedy_rollout with actions drawn from pi and successors from p.
DecodedPath sampled_rollout(const MdpModel& model, const PolicyTable& policy,
                            std::size_t start, std::size_t max_steps,
                            std::uint64_t seed,
                            std::span<const std::size_t> goals = {});

/// initial(s_1) + sum_t R'(s_t,a_t) + sum_t log p(s_{t+1}|s_t,a_t)
/// + terminal(s_T,a_T), undiscounted. The path needs one action per state.
double path_log_weight(const MdpModel& model, const Boundary& boundary,
                       const DecodedPath& path);

}  // namespace fgplan
