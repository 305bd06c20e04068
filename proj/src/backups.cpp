#include "fgplan/backups.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fgplan/parallel.hpp"
#include "fgplan/softmax.hpp"

namespace fgplan {

BackupRule BackupRule::sum_max(double alpha) {
  BackupRule rule{Family::SumMaxProduct, alpha, 1.0};
  rule.validate();
  return rule;
}

BackupRule BackupRule::soft_dp(double beta) {
  BackupRule rule{Family::SoftDP, 1.0, beta};
  rule.validate();
  return rule;
}

BackupRule BackupRule::max_rew_ent(double alpha) {
  BackupRule rule{Family::MaxRewEnt, alpha, 1.0};
  rule.validate();
  return rule;
}

void BackupRule::validate() const {
  switch (family) {
    case Family::SumMaxProduct:
      if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("sum-max needs a finite alpha >= 1");
      }
      break;
    case Family::MaxRewEnt:
      if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("max-rew-ent needs a finite alpha > 0");
      }
      break;
    case Family::SoftDP:
      if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("softdp needs a finite beta > 0");
      }
      break;
    default:
      break;
  }
}

std::string family_name(Family family) {
  switch (family) {
    case Family::SumProduct: return "sum-product";
    case Family::MaxProduct: return "max-product";
    case Family::SumMaxProduct: return "sum-max";
    case Family::DP: return "dp";
    case Family::SoftDP: return "softdp";
    case Family::MaxRewEnt: return "max-rew-ent";
  }
  return "unknown";
}

std::string BackupRule::label() const {
  std::ostringstream out;
  out << family_name(family);
  if (family == Family::SumMaxProduct || family == Family::MaxRewEnt) {
    out << "(alpha=" << alpha << ")";
  } else if (family == Family::SoftDP) {
    out << "(beta=" << beta << ")";
  }
  return out.str();
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + " has a non-finite entry");
    }
  }
}

void require_nonnegative(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) +
                                  " needs finite nonnegative entries");
    }
  }
}

// Reduction over successors of log p(s'|s,a) + V(s').
double successor_term(const BackupRule& rule, std::span<const Successor> row,
                      const VTable& v, double floor) {
  if (row.empty()) return floor;
  switch (rule.family) {
    case Family::SumProduct:
    case Family::MaxProduct:
    case Family::SumMaxProduct: {
      double m = -std::numeric_limits<double>::infinity();
      for (const Successor& e : row) m = std::max(m, std::log(e.prob) + v[e.state]);
      if (rule.family == Family::MaxProduct) return m;
      const double scale = rule.family == Family::SumMaxProduct ? rule.alpha : 1.0;
      double sum = 0.0;
      for (const Successor& e : row) {
        sum += std::exp(scale * (std::log(e.prob) + v[e.state] - m));
      }
      return m + std::log(sum) / scale;
    }
    case Family::DP:
    case Family::SoftDP:
    case Family::MaxRewEnt: {
      double sum = 0.0;
      for (const Successor& e : row) sum += e.prob * v[e.state];
      return sum;
    }
  }
  return floor;
}

double action_reduction(const BackupRule& rule, std::span<const double> q) {
  switch (rule.family) {
    case Family::SumProduct:
      return lse(q);
    case Family::MaxProduct:
    case Family::DP:
      return *std::max_element(q.begin(), q.end());
    case Family::SumMaxProduct:
    case Family::MaxRewEnt:
      return g_alpha(q, rule.alpha);
    case Family::SoftDP:
      return r_beta(q, rule.beta);
  }
  return 0.0;
}

double safe_log(double b, double floor) {
  return b > 0.0 ? std::max(std::log(b), floor) : floor;
}

template <typename Values>
void scale_to_unit_max(Values& values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  if (m > 0.0) {
    for (double& v : values) v /= m;
  }
}

}  // namespace

QTable backup_q(const BackupRule& rule, const MdpModel& model,
                const VTable& v_next) {
  rule.validate();
  if (v_next.n_states() != model.n_states()) {
    throw std::invalid_argument("backup_q: V table shape does not match model");
  }
  require_finite(v_next.values(), "backup_q: V table");

  const std::size_t A = model.n_actions();
  const double gamma = model.discount();
  const double floor = model.log_floor();
  QTable q(model.n_states(), A);
  for_each_row(model.n_states(), A * 9, [&](std::size_t s) {
    for (std::size_t a = 0; a < A; ++a) {
      const double term = successor_term(rule, model.successors(s, a), v_next, floor);
      q(s, a) = std::max(model.reward_prime(s, a) + gamma * term, floor);
    }
  });
  return q;
}

VTable backup_v(const BackupRule& rule, const QTable& q) {
  rule.validate();
  if (q.n_states() == 0 || q.n_actions() == 0) {
    throw std::invalid_argument("backup_v: empty Q table");
  }
  require_finite(q.values(), "backup_v: Q table");
  VTable v(q.n_states());
  for_each_row(q.n_states(), q.n_actions(), [&](std::size_t s) {
    v[s] = action_reduction(rule, q.row(s));
  });
  return v;
}

QTable backup_q_prob(const BackupRule& rule, const MdpModel& model,
                     const VTable& b_next) {
  rule.validate();
  if (b_next.n_states() != model.n_states()) {
    throw std::invalid_argument("backup_q_prob: table shape does not match model");
  }
  require_nonnegative(b_next.values(), "backup_q_prob: backward message");

  const double gamma = model.discount();
  const double floor = model.log_floor();
  QTable b(model.n_states(), model.n_actions());
  for (std::size_t s = 0; s < model.n_states(); ++s) {
    for (std::size_t a = 0; a < model.n_actions(); ++a) {
      const double c_prime = std::exp(model.reward_prime(s, a));
      const auto row = model.successors(s, a);
      double factor = 0.0;
      switch (rule.family) {
        case Family::SumProduct: {
          double sum = 0.0;
          for (const Successor& e : row) sum += e.prob * b_next[e.state];
          factor = std::pow(sum, gamma);
          break;
        }
        case Family::MaxProduct: {
          double best = 0.0;
          for (const Successor& e : row) best = std::max(best, e.prob * b_next[e.state]);
          factor = std::pow(best, gamma);
          break;
        }
        case Family::SumMaxProduct: {
          double sum = 0.0;
          for (const Successor& e : row) {
            sum += std::pow(e.prob, rule.alpha) * std::pow(b_next[e.state], rule.alpha);
          }
          factor = std::pow(std::pow(sum, 1.0 / rule.alpha), gamma);
          break;
        }
        case Family::DP:
        case Family::SoftDP:
        case Family::MaxRewEnt: {
          double expect = 0.0;
          for (const Successor& e : row) expect += e.prob * safe_log(b_next[e.state], floor);
          factor = std::exp(gamma * expect);
          break;
        }
      }
      b(s, a) = c_prime * factor;
    }
  }
  scale_to_unit_max(b.values());
  return b;
}

VTable backup_v_prob(const BackupRule& rule, const QTable& b) {
  rule.validate();
  require_nonnegative(b.values(), "backup_v_prob: backward message");
  VTable out(b.n_states());
  for (std::size_t s = 0; s < b.n_states(); ++s) {
    const auto row = b.row(s);
    double value = 0.0;
    switch (rule.family) {
      case Family::SumProduct:
        for (double x : row) value += x;
        break;
      case Family::MaxProduct:
      case Family::DP:
        value = *std::max_element(row.begin(), row.end());
        break;
      case Family::SumMaxProduct:
      case Family::MaxRewEnt: {
        double sum = 0.0;
        for (double x : row) sum += std::pow(x, rule.alpha);
        value = std::pow(sum, 1.0 / rule.alpha);
        break;
      }
      case Family::SoftDP: {
        double num = 0.0;
        double den = 0.0;
        for (double x : row) {
          const double w = std::pow(x, rule.beta);
          num += w * safe_log(x, kLogFloor);
          den += w;
        }
        value = den > 0.0 ? std::exp(num / den) : 0.0;
        break;
      }
    }
    out[s] = value;
  }
  scale_to_unit_max(out.values());
  return out;
}

double shift_to_zero_max(QTable& q, VTable& v, double log_floor) {
  if (v.n_states() == 0) return 0.0;
  const double m = *std::max_element(v.values().begin(), v.values().end());
  for (double& x : v.values()) x = std::max(x - m, log_floor);
  for (double& x : q.values()) x = std::max(x - m, log_floor);
  return m;
}

}  // namespace fgplan
