#include "fgplan/model.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

namespace fgplan {

namespace {

std::string pair_name(std::size_t s, std::size_t a) {
  return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
}

}  // namespace

MdpModel::MdpModel(std::size_t n_states, std::size_t n_actions,
                   std::span<const double> dense_transition,
                   std::vector<double> reward,
                   std::vector<double> action_log_prior, double discount,
                   double log_floor)
    : n_states_(n_states),
      n_actions_(n_actions),
      reward_(std::move(reward)),
      action_log_prior_(std::move(action_log_prior)),
      discount_(discount),
      log_floor_(log_floor) {
  if (dense_transition.size() != n_states * n_actions * n_states) {
    throw std::invalid_argument("dense transition tensor has wrong size");
  }
  std::vector<std::vector<Successor>> rows(n_states * n_actions);
  for (std::size_t row = 0; row < rows.size(); ++row) {
    for (std::size_t next = 0; next < n_states; ++next) {
      const double p = dense_transition[row * n_states + next];
      if (p != 0.0) rows[row].push_back({next, p});
    }
  }
  build_rows(rows);
}

MdpModel::MdpModel(std::size_t n_states, std::size_t n_actions,
                   const std::vector<std::vector<Successor>>& rows,
                   std::vector<double> reward,
                   std::vector<double> action_log_prior, double discount,
                   double log_floor)
    : n_states_(n_states),
      n_actions_(n_actions),
      reward_(std::move(reward)),
      action_log_prior_(std::move(action_log_prior)),
      discount_(discount),
      log_floor_(log_floor) {
  if (rows.size() != n_states * n_actions) {
    throw std::invalid_argument("transition row count does not match shape");
  }
  build_rows(rows);
}

void MdpModel::build_rows(const std::vector<std::vector<Successor>>& rows) {
  if (n_states_ == 0 || n_actions_ == 0) {
    throw std::invalid_argument("model needs at least one state and action");
  }
  if (reward_.size() != n_states_ * n_actions_ ||
      action_log_prior_.size() != n_actions_) {
    throw std::invalid_argument("reward or prior table has wrong size");
  }
  offsets_.assign(rows.size() + 1, 0);
  entries_.clear();
  for (std::size_t row = 0; row < rows.size(); ++row) {
    std::size_t last = 0;
    for (std::size_t k = 0; k < rows[row].size(); ++k) {
      const Successor& e = rows[row][k];
      if (e.state >= n_states_) {
        throw std::invalid_argument("successor index out of range");
      }
      if (k > 0 && e.state <= last) {
        throw std::invalid_argument("successors must be strictly increasing");
      }
      last = e.state;
      if (e.prob != 0.0) entries_.push_back(e);
    }
    offsets_[row + 1] = entries_.size();
  }
}

double MdpModel::transition(std::size_t s, std::size_t a,
                            std::size_t next) const {
  for (const Successor& e : successors(s, a)) {
    if (e.state == next) return e.prob;
    if (e.state > next) break;
  }
  return 0.0;
}

MdpModel MdpModel::with_discount(double discount) const {
  MdpModel copy = *this;
  copy.discount_ = discount;
  return copy;
}

std::vector<Violation> validate_model(const MdpModel& model) {
  std::vector<Violation> out;
  const std::size_t S = model.n_states();
  const std::size_t A = model.n_actions();

  if (!(model.discount() > 0.0 && model.discount() <= 1.0)) {
    out.push_back({"discount in (0, 1]", "discount"});
  }
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      double total = 0.0;
      bool negative = false;
      for (const Successor& e : model.successors(s, a)) {
        total += e.prob;
        if (!(e.prob >= 0.0)) negative = true;
      }
      if (negative) {
        out.push_back({"transition entries >= 0", pair_name(s, a)});
      }
      if (!(std::abs(total - 1.0) <= 1e-12)) {
        std::ostringstream msg;
        msg << pair_name(s, a) << " sums to " << total;
        out.push_back({"transition row sums to 1", msg.str()});
      }
      const double r = model.reward(s, a);
      if (!std::isfinite(r) || r < model.log_floor()) {
        out.push_back({"reward finite and >= floor", pair_name(s, a)});
      } else if (r > 0.0) {
        out.push_back({"reward <= 0", pair_name(s, a)});
      }
    }
  }
  double prior_mass = 0.0;
  for (std::size_t a = 0; a < A; ++a) {
    const double lp = model.action_log_prior(a);
    if (!(lp <= 0.0)) {
      out.push_back({"action log-prior <= 0", "a=" + std::to_string(a)});
    }
    prior_mass += std::exp(lp);
  }
  if (!(std::abs(prior_mass - 1.0) <= 1e-12)) {
    out.push_back({"action prior sums to 1", "action_log_prior"});
  }
  return out;
}

// Grid worlds ----------------------------------------------------------------

std::vector<std::size_t> GridSpec::goal_states() const {
  std::vector<std::size_t> out;
  out.reserve(goals.size());
  for (const Cell& c : goals) out.push_back(index(c));
  return out;
}

void check_grid(const GridSpec& grid) {
  if (grid.width == 0 || grid.height == 0) {
    throw ParseError("grid has zero width or height");
  }
  if (grid.cells.size() != grid.width * grid.height) {
    throw ParseError("grid cell count does not match width * height");
  }
  if (!grid.class_rewards.contains(grid.goal_class)) {
    throw ParseError(std::string("goal class '") + grid.goal_class +
                     "' has no reward entry");
  }
  std::vector<Cell> expected_goals;
  for (std::size_t r = 0; r < grid.height; ++r) {
    for (std::size_t c = 0; c < grid.width; ++c) {
      const char k = grid.at(r, c);
      if (!grid.class_rewards.contains(k)) {
        throw ParseError("cell (" + std::to_string(r) + ", " +
                         std::to_string(c) + ") has class '" + k +
                         "' with no reward entry");
      }
      if (k == grid.goal_class) expected_goals.push_back({r, c});
    }
  }
  if (expected_goals != grid.goals) {
    throw ParseError("goal list does not match the cells of the goal class");
  }
  for (const auto& [k, reward] : grid.class_rewards) {
    if (std::isnan(reward) || reward > 0.0) {
      throw ParseError(std::string("class '") + k + "' reward must be <= 0");
    }
  }
}

MdpModel build_grid_model(const GridSpec& grid, double intent_prob,
                          double discount, GoalMode goal_mode, double log_floor) {
  check_grid(grid);
  if (!(intent_prob > 0.0 && intent_prob <= 1.0)) {
    throw std::invalid_argument("intent_prob must lie in (0, 1]");
  }
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw std::invalid_argument("discount must lie in (0, 1]");
  }

  const std::size_t S = grid.width * grid.height;
  const double side = (1.0 - intent_prob) / static_cast<double>(kGridActions - 1);
  std::vector<std::vector<Successor>> rows(S * kGridActions);
  std::vector<double> reward(S * kGridActions);

  for (std::size_t s = 0; s < S; ++s) {
    const Cell here = grid.cell(s);
    double r = grid.class_rewards.at(grid.cells[s]);
    if (!std::isfinite(r) || r < log_floor) r = log_floor;

    for (std::size_t a = 0; a < kGridActions; ++a) {
      reward[s * kGridActions + a] = r;
      if (goal_mode == GoalMode::Absorbing && grid.is_goal(s)) {
        rows[s * kGridActions + a].push_back({s, 1.0});
        continue;
      }

      std::array<double, kGridActions> mass{};
      std::array<bool, kGridActions> inside{};
      std::array<std::size_t, kGridActions> landing{};
      double removed = 0.0;
      std::size_t kept = 0;
      for (std::size_t k = 0; k < kGridActions; ++k) {
        mass[k] = (k == a) ? intent_prob : side;
        const long nr = static_cast<long>(here.row) + kMoveOffsets[k].dr;
        const long nc = static_cast<long>(here.col) + kMoveOffsets[k].dc;
        inside[k] = nr >= 0 && nc >= 0 && nr < static_cast<long>(grid.height) &&
                    nc < static_cast<long>(grid.width);
        if (inside[k]) {
          landing[k] = grid.index({static_cast<std::size_t>(nr),
                                   static_cast<std::size_t>(nc)});
          ++kept;
        } else {
          removed += mass[k];
        }
      }
      // `still` always lands inside the grid.
      assert(kept > 0);
      const double share = removed / static_cast<double>(kept);

      // Offsets are scanned row-major, so landing cells come out sorted.
      auto& row = rows[s * kGridActions + a];
      for (std::size_t k = 0; k < kGridActions; ++k) {
        if (!inside[k]) continue;
        const double p = mass[k] + share;
        if (p == 0.0) continue;
        row.push_back({landing[k], p});
      }
    }
  }

  std::vector<double> prior(kGridActions,
                            -std::log(static_cast<double>(kGridActions)));
  return MdpModel(S, kGridActions, rows, std::move(reward), std::move(prior),
                  discount, log_floor);
}

}  // namespace fgplan
