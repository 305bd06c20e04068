#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fgplan/model.hpp"

namespace fgplan {

enum class Family { SumProduct, MaxProduct, SumMaxProduct, DP, SoftDP, MaxRewEnt };

/// One of the six backup families together with its parameter.
///
/// alpha is used by SumMaxProduct (alpha >= 1) and MaxRewEnt (alpha > 0);
/// beta by SoftDP (beta > 0). Construction through the factories validates the
/// domain and throws std::invalid_argument otherwise.
struct BackupRule {
  Family family = Family::SumProduct;
  double alpha = 1.0;
  double beta = 1.0;

  static BackupRule sum_product() { return {Family::SumProduct, 1.0, 1.0}; }
  static BackupRule max_product() { return {Family::MaxProduct, 1.0, 1.0}; }
  static BackupRule sum_max(double alpha);
  static BackupRule dp() { return {Family::DP, 1.0, 1.0}; }
  static BackupRule soft_dp(double beta);
  static BackupRule max_rew_ent(double alpha);

  /// Throws std::invalid_argument if the parameter is outside the domain.
  void validate() const;

  /// Sum, Max and Sum/Max: messages are probabilities in disguise and only
  /// their shape matters.
  bool probabilistic() const {
    return family == Family::SumProduct || family == Family::MaxProduct ||
           family == Family::SumMaxProduct;
  }

  /// e.g. "sum-max(alpha=3)".
  std::string label() const;
};

std::string family_name(Family family);

/// Dense table over (s, a). Holds Q = log b in the log-space routines and b
/// itself in the probability-space twins.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t n_states, std::size_t n_actions, double fill = 0.0)
      : n_states_(n_states), n_actions_(n_actions),
        values_(n_states * n_actions, fill) {}

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }

  double& operator()(std::size_t s, std::size_t a) {
    return values_[s * n_actions_ + a];
  }
  double operator()(std::size_t s, std::size_t a) const {
    return values_[s * n_actions_ + a];
  }
  std::span<double> row(std::size_t s) {
    return {values_.data() + s * n_actions_, n_actions_};
  }
  std::span<const double> row(std::size_t s) const {
    return {values_.data() + s * n_actions_, n_actions_};
  }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> values_;
};

/// Dense table over s. Holds V = log b or b itself, as QTable.
class VTable {
 public:
  VTable() = default;
  explicit VTable(std::size_t n_states, double fill = 0.0)
      : values_(n_states, fill) {}
  explicit VTable(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t n_states() const { return values_.size(); }
  double& operator[](std::size_t s) { return values_[s]; }
  double operator[](std::size_t s) const { return values_[s]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Q(s,a) = R'(s,a) + gamma * [reduction over s' of the next-step values]
/// with R' = log p(a) + R. The probabilistic families reduce
/// log p(s'|s,a) + V(s') by lse, max or g_alpha; DP, SoftDP and MaxRewEnt take
/// the expectation sum p(s'|s,a) V(s'). Entries are clamped at the floor.
QTable backup_q(const BackupRule& rule, const MdpModel& model,
                const VTable& v_next);

/// Reduction over actions: lse (Sum), max (Max, DP), g_alpha (Sum/Max,
/// MaxRewEnt), r_beta (SoftDP).
VTable backup_v(const BackupRule& rule, const QTable& q);

/// Probability-space twin of backup_q with c'(s,a) = p(a) exp(R(s,a)).
/// Output is scaled so its largest entry is 1.
QTable backup_q_prob(const BackupRule& rule, const MdpModel& model,
                     const VTable& b_next);

/// Probability-space twin of backup_v; output scaled to max entry 1.
VTable backup_v_prob(const BackupRule& rule, const QTable& b);

/// Subtracts max V from both tables, re-clamping at the floor; returns the
/// amount subtracted.
double shift_to_zero_max(QTable& q, VTable& v, double log_floor = kLogFloor);

}  // namespace fgplan
