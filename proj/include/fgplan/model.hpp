#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fgplan/common.hpp"

namespace fgplan {

struct Successor {
  std::size_t state;
  double prob;
};

/// Finite state-action MDP.
///
/// Transitions are stored row-sparse: each (s, a) row keeps only its nonzero
/// entries, in increasing successor order. Rewards live in log-prior units
/// (R = log c, so R <= 0); forbidden pairs carry the floor value instead of
/// -infinity. The model does not check its own invariants; see validate_model.
class MdpModel {
 public:
  /// Builds from a dense tensor indexed [(s * n_actions + a) * n_states + s'].
  MdpModel(std::size_t n_states, std::size_t n_actions,
           std::span<const double> dense_transition,
           std::vector<double> reward, std::vector<double> action_log_prior,
           double discount, double log_floor = kLogFloor);

  /// Builds from per-(s, a) sparse rows, indexed s * n_actions + a.
  MdpModel(std::size_t n_states, std::size_t n_actions,
           const std::vector<std::vector<Successor>>& rows,
           std::vector<double> reward, std::vector<double> action_log_prior,
           double discount, double log_floor = kLogFloor);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  double discount() const { return discount_; }
  double log_floor() const { return log_floor_; }

  std::span<const Successor> successors(std::size_t s, std::size_t a) const {
    const std::size_t row = s * n_actions_ + a;
    return {entries_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }

  /// p(s' | s, a); zero when s' is not stored in the row.
  double transition(std::size_t s, std::size_t a, std::size_t next) const;

  double reward(std::size_t s, std::size_t a) const {
    return reward_[s * n_actions_ + a];
  }
  double action_log_prior(std::size_t a) const { return action_log_prior_[a]; }

  /// log p(a) + R(s, a).
  double reward_prime(std::size_t s, std::size_t a) const {
    return action_log_prior_[a] + reward(s, a);
  }

  const std::vector<double>& rewards() const { return reward_; }
  const std::vector<double>& action_log_priors() const {
    return action_log_prior_;
  }

  MdpModel with_discount(double discount) const;

 private:
  void build_rows(const std::vector<std::vector<Successor>>& rows);

  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<std::size_t> offsets_;
  std::vector<Successor> entries_;
  std::vector<double> reward_;
  std::vector<double> action_log_prior_;
  double discount_;
  double log_floor_;
};

struct Violation {
  std::string invariant;
  std::string location;
};

/// Empty iff every MdpModel invariant holds.
std::vector<Violation> validate_model(const MdpModel& model);

// Grid worlds ----------------------------------------------------------------

inline constexpr std::size_t kGridActions = 9;

/// Row-major 3x3 scan, `still` at index 4.
enum class Move : std::size_t {
  UpLeft,
  Up,
  UpRight,
  Left,
  Still,
  Right,
  DownLeft,
  Down,
  DownRight,
};

struct Offset {
  int dr;
  int dc;
};

inline constexpr std::array<Offset, kGridActions> kMoveOffsets{{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 0}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};

inline constexpr std::array<std::string_view, kGridActions> kMoveNames{
    "up-left", "up",        "up-right", "left",      "still",
    "right",   "down-left", "down",     "down-right",
};

struct Cell {
  std::size_t row;
  std::size_t col;
  auto operator<=>(const Cell&) const = default;
};

/// Semantic map: one class character per cell plus a reward per class.
struct GridSpec {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<char> cells;  // row-major
  std::map<char, double> class_rewards;
  char goal_class = 'G';
  std::vector<Cell> goals;  // row-major order

  char at(std::size_t row, std::size_t col) const {
    return cells[row * width + col];
  }
  std::size_t index(Cell c) const { return c.row * width + c.col; }
  Cell cell(std::size_t state) const { return {state / width, state % width}; }
  bool is_goal(std::size_t state) const { return cells[state] == goal_class; }
  bool is_obstacle(std::size_t state) const { return cells[state] == '#'; }
  std::vector<std::size_t> goal_states() const;
};

/// Throws ParseError unless every GridSpec invariant holds.
void check_grid(const GridSpec& grid);

enum class GoalMode {
  Absorbing,  // every action at a goal cell stays there with probability 1
  Open,       // goal cells use the same kernel as every other cell
};

/// States are cells (row-major); each move lands on the intended cell with
/// intent_prob and on each of the other eight neighbours with
/// (1 - intent_prob) / 8. Off-grid landings are dropped and their mass is
/// shared equally among the in-grid landing cells of the same neighbourhood.
MdpModel build_grid_model(const GridSpec& grid, double intent_prob = 0.5,
                          double discount = 1.0,
                          GoalMode goal_mode = GoalMode::Absorbing,
                          double log_floor = kLogFloor);

/// Parses the text map format or its JSON equivalent (detected by a leading
/// '{'). Throws ParseError naming the line, row or column at fault.
GridSpec load_map(std::string_view text);
GridSpec load_map_file(const std::string& path);

}  // namespace fgplan
