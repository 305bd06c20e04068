#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fgplan/backups.hpp"
#include "fgplan/model.hpp"

namespace fgplan {

/// Constraints entering the chain from its two ends, as log messages.
///
/// `initial` is the forward message on S_1 (a known start is a delta, no
/// knowledge is uniform). `terminal` is the backward message over (s_T, a_T)
/// arriving from beyond the horizon; all zeros means open-ended.
struct Boundary {
  std::vector<double> initial;   // over s
  std::vector<double> terminal;  // over (s, a), row-major

  static Boundary uninformative(const MdpModel& model);
  /// Delta on `start`, open-ended terminal.
  static Boundary from_start(const MdpModel& model, std::size_t start);
  /// Replaces the terminal message by a delta on final state `state`, uniform
  /// over actions.
  Boundary& require_final_state(const MdpModel& model, std::size_t state);

  /// Throws std::invalid_argument on shape mismatch, NaN, or all-floor
  /// messages. Entries below the floor are clamped.
  void normalize(const MdpModel& model);
};

/// Finite-horizon messages. Index t = 0 is the first time step.
///
/// For the probabilistic families every V_t (and Q_t) is shifted so its
/// maximum is 0; `log_offset[t]` is what was taken out, so the unnormalized
/// backward message is v[t][s] + log_offset[t]. DP-family tables are kept
/// as computed and their offsets are 0.
struct HorizonSolution {
  BackupRule rule;
  Boundary boundary;
  std::vector<QTable> q;
  std::vector<VTable> v;
  std::vector<double> log_offset;
  std::vector<VTable> forward;  // empty until forward_sweep has run

  std::size_t horizon() const { return v.size(); }
  double raw_v(std::size_t t, std::size_t s) const { return v[t][s] + log_offset[t]; }
  double raw_q(std::size_t t, std::size_t s, std::size_t a) const {
    return q[t](s, a) + log_offset[t];
  }
};

HorizonSolution backward_sweep(const MdpModel& model, const BackupRule& rule,
                               std::size_t horizon, Boundary boundary);

/// Forward state messages f_1..f_T, each shifted to maximum 0.
/// SoftDP and MaxRewEnt use the DP forward rule.
std::vector<VTable> forward_sweep(const MdpModel& model, const BackupRule& rule,
                                  std::size_t horizon, Boundary boundary);

/// backward_sweep followed by forward_sweep.
HorizonSolution solve_horizon(const MdpModel& model, const BackupRule& rule,
                              std::size_t horizon, Boundary boundary);

/// Per-step state posteriors, proportional to exp(f_t + V_t). Sum/Max
/// messages are alpha-th roots of those of the powered model, so their
/// posteriors are exp(alpha (f_t + V_t)), the marginals of p^alpha.
/// Throws InfeasibleError when a step has no state above the floor.
std::vector<std::vector<double>> posteriors(const HorizonSolution& sol);

enum class Termination { Tolerance, MaxIter };

struct ConvergenceReport {
  std::vector<double> increments;  // sup-norm V change per iteration
  std::size_t iterations = 0;
  Termination terminated_by = Termination::MaxIter;
};

struct SteadyState {
  QTable q;
  VTable v;
  ConvergenceReport report;
};

inline constexpr double kDefaultTolerance = 1e-5;
inline constexpr std::size_t kDefaultMaxIter = 10000;

/// Repeats Q <- backup_q(V), V <- backup_v(Q) from V = 0 until the sup-norm
/// change of V drops below tol.
///
/// Tables are shifted to maximum 0 after every sweep for the probabilistic
/// families, and for every family when gamma = 1 (undiscounted DP-family
/// values otherwise drift by the average reward per step and have no fixed
/// point). Throws DivergenceError when an increment exceeds ten times the one
/// fifty iterations earlier.
SteadyState steady_state(const MdpModel& model, const BackupRule& rule,
                         double tol = kDefaultTolerance,
                         std::size_t max_iter = kDefaultMaxIter);

/// Whether steady_state shifts the tables of `rule` on `model`.
bool steady_state_normalizes(const MdpModel& model, const BackupRule& rule);

}  // namespace fgplan
