// fgplan command-line driver: plan, compare, sweep, decode (and a hidden
// oracle subcommand for poking at tiny random models).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fgplan/engine.hpp"
#include "fgplan/model.hpp"
#include "fgplan/oracle.hpp"
#include "fgplan/policy.hpp"
#include "fgplan/report.hpp"
#include "json.hpp"

namespace {

using namespace fgplan;
using nlohmann::json;

enum ExitCode { kOk = 0, kParse = 2, kDivergence = 3, kInfeasible = 4 };

// Errors carry the stage they came from so the message can name it.
struct StageError {
  std::string stage;
  std::string message;
  int code;
};

const std::vector<std::string> kPaperRules = {
    "sum-product",  "max-product", "sum-max:3",       "softdp:0.2",    "softdp:0.6",
    "dp",           "max-rew-ent:0.2", "max-rew-ent:1", "max-rew-ent:6",
};

struct Options {
  std::string map_path;
  std::string rule = "sum-product";
  std::vector<std::string> rules;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double tol = kDefaultTolerance;
  std::size_t max_iter = kDefaultMaxIter;
  std::size_t horizon = 0;
  std::string start;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  double intent = 0.5;
  std::string goals = "absorbing";
  std::string policy = "soft";
  std::string param;
  std::vector<double> values;
  std::string kind = "marginals";
  std::size_t states = 3;
  std::size_t actions = 2;
  bool timing = false;
  bool end_at_goal = false;
};

struct Problem {
  GridSpec grid;
  MdpModel model;
};

Problem load_problem(const Options& opt, double gamma) {
  GridSpec grid;
  try {
    grid = load_map_file(opt.map_path);
  } catch (const ParseError& e) {
    throw StageError{"map", e.what(), kParse};
  }
  GoalMode mode = GoalMode::Absorbing;
  if (opt.goals == "open") mode = GoalMode::Open;
  try {
    MdpModel model = build_grid_model(grid, opt.intent, gamma, mode);
    return {std::move(grid), std::move(model)};
  } catch (const std::invalid_argument& e) {
    throw StageError{"model", e.what(), kParse};
  }
}

BackupRule rule_from(const std::string& text, const Options& opt) {
  try {
    return parse_rule(text, opt.alpha, opt.beta);
  } catch (const ParseError& e) {
    throw StageError{"rule", e.what(), kParse};
  }
}

std::optional<std::size_t> start_state(const Options& opt, const GridSpec& grid) {
  if (opt.start.empty()) return std::nullopt;
  try {
    return grid.index(parse_cell(opt.start, grid));
  } catch (const ParseError& e) {
    throw StageError{"start", e.what(), kParse};
  }
}

SteadyState solve_steady(const MdpModel& model, const BackupRule& rule, const Options& opt) {
  try {
    return steady_state(model, rule, opt.tol, opt.max_iter);
  } catch (const DivergenceError& e) {
    throw StageError{"solve", e.what(), kDivergence};
  } catch (const std::invalid_argument& e) {
    throw StageError{"solve", e.what(), kParse};
  }
}

PolicyTable policy_for(const BackupRule& rule, const QTable& q, const VTable& v,
                       const Options& opt) {
  if (opt.policy == "tempered") return tempered_policy(rule, q, v);
  if (opt.policy == "hard") return extract_policy(q, v, PolicyMode::HardArgmax);
  return extract_policy(q, v, PolicyMode::Soft);
}

std::string out_path(const Options& opt, const std::string& name) {
  return (std::filesystem::path(opt.out) / name).string();
}

void prepare_out(const Options& opt) {
  std::error_code ec;
  std::filesystem::create_directories(opt.out, ec);
  if (ec) throw StageError{"output", "cannot create '" + opt.out + "': " + ec.message(), kParse};
}

json parsed(const std::string& text) { return json::parse(text); }

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += ',';
    out += cells[i];
  }
  return out + "\n";
}

std::string termination_name(Termination t) {
  return t == Termination::Tolerance ? "tolerance" : "max-iter";
}

Boundary horizon_boundary(const Options& opt, const Problem& problem,
                          std::optional<std::size_t> start) {
  Boundary b = start ? Boundary::from_start(problem.model, *start)
                     : Boundary::uninformative(problem.model);
  if (opt.end_at_goal) {
    const std::size_t A = problem.model.n_actions();
    std::fill(b.terminal.begin(), b.terminal.end(), problem.model.log_floor());
    for (std::size_t g : problem.grid.goal_states())
      std::fill(b.terminal.begin() + g * A, b.terminal.begin() + (g + 1) * A, 0.0);
  }
  return b;
}

int cmd_plan(const Options& opt) {
  const Problem problem = load_problem(opt, opt.gamma);
  const BackupRule rule = rule_from(opt.rule, opt);
  const auto start = start_state(opt, problem.grid);
  const auto goals = problem.grid.goal_states();
  prepare_out(opt);

  json run = {{"map", opt.map_path},
              {"rule", rule_spec(rule)},
              {"gamma", opt.gamma},
              {"intent_prob", opt.intent},
              {"goals", opt.goals},
              {"policy", opt.policy}};

  if (opt.horizon > 0) {
    const Boundary boundary = horizon_boundary(opt, problem, start);
    HorizonSolution sol;
    DecodedPath path;
    try {
      sol = solve_horizon(problem.model, rule, opt.horizon, boundary);
      path = progressive_decode(problem.model, sol);
    } catch (const InfeasibleError& e) {
      throw StageError{"decode", e.what(), kInfeasible};
    }
    for (std::size_t s : path.states) path.goal_reached = path.goal_reached || problem.grid.is_goal(s);
    const PolicyTable policy = policy_for(rule, sol.q[0], sol.v[0], opt);
    write_text_file(out_path(opt, "value.json"), value_json(problem.grid, sol.v[0]));
    write_text_file(out_path(opt, "q.json"), q_json(problem.grid, sol.q[0]));
    write_text_file(out_path(opt, "policy.json"), policy_json(problem.grid, policy));
    write_text_file(out_path(opt, "arrows.txt"), arrows_text(problem.grid, policy));
    write_text_file(out_path(opt, "path.json"), path_json(problem.grid, path));
    run["mode"] = "horizon";
    run["horizon"] = opt.horizon;
    run["mean_entropy"] = std::stod(format_number(mean_entropy(policy)));
    write_text_file(out_path(opt, "run.json"), run.dump(2) + "\n");
    return kOk;
  }

  const SteadyState ss = solve_steady(problem.model, rule, opt);
  const PolicyTable policy = policy_for(rule, ss.q, ss.v, opt);
  write_text_file(out_path(opt, "value.json"), value_json(problem.grid, ss.v));
  write_text_file(out_path(opt, "q.json"), q_json(problem.grid, ss.q));
  write_text_file(out_path(opt, "policy.json"), policy_json(problem.grid, policy));
  write_text_file(out_path(opt, "arrows.txt"), arrows_text(problem.grid, policy));
  write_text_file(out_path(opt, "convergence.csv"), convergence_csv(ss.report));

  const std::size_t max_steps = problem.grid.width * problem.grid.height;
  std::string rollouts = "row,col,steps,goal_reached\n";
  std::size_t reached = 0;
  try {
    for (std::size_t s = 0; s < problem.model.n_states(); ++s) {
      const DecodedPath p = greedy_rollout(problem.model, policy, s, max_steps, goals);
      const Cell c = problem.grid.cell(s);
      rollouts += csv_row({std::to_string(c.row), std::to_string(c.col),
                           std::to_string(p.actions.size()), p.goal_reached ? "1" : "0"});
      reached += p.goal_reached ? 1 : 0;
    }
    if (start && opt.seed) {
      DecodedPath p = sampled_rollout(problem.model, policy, *start, max_steps, *opt.seed, goals);
      write_text_file(out_path(opt, "sampled_rollout.json"), path_json(problem.grid, p));
    }
  } catch (const InfeasibleError& e) {
    throw StageError{"rollout", e.what(), kInfeasible};
  }
  write_text_file(out_path(opt, "rollouts.csv"), rollouts);

  run["mode"] = "steady-state";
  run["tol"] = opt.tol;
  run["iterations"] = ss.report.iterations;
  run["terminated_by"] = termination_name(ss.report.terminated_by);
  run["final_increment"] = std::stod(format_number(ss.report.increments.back()));
  run["mean_entropy"] = std::stod(format_number(mean_entropy(policy)));
  run["rollouts_reaching_goal"] = reached;
  write_text_file(out_path(opt, "run.json"), run.dump(2) + "\n");

  if (ss.report.terminated_by != Termination::Tolerance) {
    throw StageError{"solve",
                     rule.label() + " did not reach tolerance " + format_number(opt.tol) +
                         " within " + std::to_string(opt.max_iter) + " iterations",
                     kDivergence};
  }
  return kOk;
}

int cmd_compare(const Options& opt) {
  const std::vector<std::string>& specs = opt.rules.empty() ? kPaperRules : opt.rules;
  if (specs.size() < 2) throw StageError{"rule", "compare needs at least two rules", kParse};
  const Problem problem = load_problem(opt, opt.gamma);
  std::vector<BackupRule> rules;
  for (const auto& spec : specs) rules.push_back(rule_from(spec, opt));
  const auto start = start_state(opt, problem.grid);
  const std::size_t point =
      start ? *start : problem.grid.index({problem.grid.height / 2, problem.grid.width / 2});
  prepare_out(opt);

  std::string comparison = "rule,iterations,final_increment,mean_entropy,terminated_by\n";
  std::string capped;
  std::string timing = "rule,wall_seconds\n";
  std::vector<std::vector<double>> increments;
  json point_rows = json::array();
  for (const BackupRule& rule : rules) {
    const auto t0 = std::chrono::steady_clock::now();
    const SteadyState ss = solve_steady(problem.model, rule, opt);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const PolicyTable policy = policy_for(rule, ss.q, ss.v, opt);
    comparison += csv_row({rule_spec(rule), std::to_string(ss.report.iterations),
                           format_number(ss.report.increments.back()),
                           format_number(mean_entropy(policy)),
                           termination_name(ss.report.terminated_by)});
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", seconds);
    timing += csv_row({rule_spec(rule), buf});
    increments.push_back(ss.report.increments);
    if (ss.report.terminated_by != Termination::Tolerance && capped.empty()) capped = rule_spec(rule);

    json row = json::array();
    for (double p : policy.row(point)) row.push_back(std::stod(format_number(p)));
    point_rows.push_back({{"rule", rule_spec(rule)},
                          {"policy", row},
                          {"tie_multiplicity", policy.tie_multiplicity(point)}});
  }

  std::size_t longest = 0;
  for (const auto& inc : increments) longest = std::max(longest, inc.size());
  std::vector<std::string> header = {"iteration"};
  for (const BackupRule& rule : rules) header.push_back(rule_spec(rule));
  std::string inc_csv = csv_row(header);
  for (std::size_t k = 0; k < longest; ++k) {
    std::vector<std::string> cells = {std::to_string(k + 1)};
    for (const auto& inc : increments) cells.push_back(k < inc.size() ? format_number(inc[k]) : "");
    inc_csv += csv_row(cells);
  }

  json actions = json::array();
  for (auto name : kMoveNames) actions.push_back(std::string(name));
  const Cell cell = problem.grid.cell(point);
  json point_doc = {{"cell", {cell.row, cell.col}},
                    {"policy_mode", opt.policy},
                    {"actions", actions},
                    {"rules", point_rows}};

  write_text_file(out_path(opt, "comparison.csv"), comparison);
  write_text_file(out_path(opt, "increments.csv"), inc_csv);
  write_text_file(out_path(opt, "point_policy.json"), point_doc.dump(2) + "\n");
  if (opt.timing) write_text_file(out_path(opt, "timing.csv"), timing);
  if (!capped.empty()) {
    throw StageError{"solve", capped + " did not reach tolerance within " +
                                  std::to_string(opt.max_iter) + " iterations",
                     kDivergence};
  }
  return kOk;
}

int cmd_sweep(const Options& opt) {
  if (opt.param != "alpha" && opt.param != "beta" && opt.param != "gamma") {
    throw StageError{"sweep", "--param must be alpha, beta or gamma", kParse};
  }
  if (opt.values.empty()) throw StageError{"sweep", "--values is empty", kParse};
  prepare_out(opt);

  std::string csv =
      "value,iterations,final_increment,mean_entropy,tempered_entropy,dp_argmax_agreement\n";
  std::string capped;
  for (double value : opt.values) {
    Options local = opt;
    if (opt.param == "alpha") local.alpha = value;
    if (opt.param == "beta") local.beta = value;
    if (opt.param == "gamma") local.gamma = value;
    const std::size_t colon = opt.rule.find(':');
    const std::string family = opt.param == "gamma" ? opt.rule : opt.rule.substr(0, colon);
    const BackupRule rule = rule_from(family, local);
    if (local.gamma <= 0.0 || local.gamma > 1.0) {
      throw StageError{"sweep", "gamma must lie in (0, 1]", kParse};
    }
    const Problem problem = load_problem(local, local.gamma);
    const SteadyState ss = solve_steady(problem.model, rule, local);
    const SteadyState dp = solve_steady(problem.model, BackupRule::dp(), local);
    if (ss.report.terminated_by != Termination::Tolerance && capped.empty()) capped = format_number(value);
    const PolicyTable soft = extract_policy(ss.q, ss.v);
    const PolicyTable tempered = tempered_policy(rule, ss.q, ss.v);
    const PolicyTable reference = extract_policy(dp.q, dp.v);
    std::size_t agree = 0;
    for (std::size_t s = 0; s < soft.n_states(); ++s) {
      agree += soft.best_action(s) == reference.best_action(s) ? 1 : 0;
    }
    csv += csv_row({format_number(value), std::to_string(ss.report.iterations),
                    format_number(ss.report.increments.back()),
                    format_number(mean_entropy(soft)), format_number(mean_entropy(tempered)),
                    format_number(static_cast<double>(agree) / soft.n_states())});
  }
  write_text_file(out_path(opt, "sweep.csv"), csv);
  if (!capped.empty()) {
    throw StageError{"solve", opt.param + " = " + capped + " did not reach tolerance within " +
                                  std::to_string(opt.max_iter) + " iterations",
                     kDivergence};
  }
  return kOk;
}

int cmd_decode(const Options& opt) {
  if (opt.horizon == 0) throw StageError{"decode", "--horizon must be at least 1", kParse};
  const Problem problem = load_problem(opt, opt.gamma);
  const BackupRule rule = rule_from(opt.rule, opt);
  const auto start = start_state(opt, problem.grid);
  prepare_out(opt);

  const Boundary boundary = horizon_boundary(opt, problem, start);
  json doc = {{"rule", rule_spec(rule)}, {"horizon", opt.horizon}};
  try {
    const HorizonSolution sol = solve_horizon(problem.model, rule, opt.horizon, boundary);
    DecodedPath progressive = progressive_decode(problem.model, sol);
    DecodedPath parallel = parallel_decode(problem.model, posteriors(sol));
    for (DecodedPath* p : {&progressive, &parallel}) {
      for (std::size_t s : p->states) p->goal_reached = p->goal_reached || problem.grid.is_goal(s);
    }
    doc["progressive"] = parsed(path_json(problem.grid, progressive));
    doc["parallel"] = parsed(path_json(problem.grid, parallel));
  } catch (const InfeasibleError& e) {
    throw StageError{"decode", e.what(), kInfeasible};
  }
  write_text_file(out_path(opt, "decode.json"), doc.dump(2) + "\n");
  return kOk;
}

double max_abs_diff(const std::vector<std::vector<double>>& a,
                    const std::vector<std::vector<double>>& b) {
  double d = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (std::size_t s = 0; s < a[t].size(); ++s) d = std::max(d, std::abs(a[t][s] - b[t][s]));
  }
  return d;
}

int cmd_oracle(const Options& opt) {
  const std::uint64_t seed = opt.seed.value_or(1);
  const std::size_t T = opt.horizon == 0 ? 2 : opt.horizon;
  try {
    if (opt.kind == "marginals" || opt.kind == "map") {
      const MdpModel model = random_model(seed, opt.states, opt.actions);
      const Boundary boundary = Boundary::uninformative(model);
      if (opt.kind == "marginals") {
        const BackupRule rule =
            opt.alpha == 1.0 ? BackupRule::sum_product() : BackupRule::sum_max(opt.alpha);
        const auto engine = posteriors(solve_horizon(model, rule, T, boundary));
        const auto brute = brute_marginals(model, T, boundary, opt.alpha);
        const auto elim = eliminate_marginals(model, T, boundary, opt.alpha);
        std::cout << "engine vs enumeration: " << format_number(max_abs_diff(engine, brute))
                  << "\nenumeration vs elimination: "
                  << format_number(max_abs_diff(brute, elim)) << "\n";
      } else {
        const HorizonSolution sol = solve_horizon(model, BackupRule::max_product(), T, boundary);
        const DecodedPath path = progressive_decode(model, sol);
        const MapSequence best = brute_map(model, T, boundary);
        std::cout << "map weight " << format_number(best.log_weight) << " (ties "
                  << best.multiplicity << "), decoded weight "
                  << format_number(path_log_weight(model, boundary, path)) << ", same sequence "
                  << (path.states == best.states && path.actions == best.actions ? "yes" : "no")
                  << "\n";
      }
    } else if (opt.kind == "dp") {
      const MdpModel model = random_model(seed, opt.states, opt.actions, opt.gamma);
      const HorizonSolution sol =
          backward_sweep(model, BackupRule::dp(), T, Boundary::uninformative(model));
      const auto brute = brute_dp_value(model, T);
      for (std::size_t s = 0; s < model.n_states(); ++s) {
        std::cout << "state " << s << ": engine " << format_number(sol.raw_v(0, s))
                  << " enumeration " << format_number(brute[s]) << "\n";
      }
    } else if (opt.kind == "rew-ent") {
      const MdpModel model = random_model(seed, 2, 2, opt.gamma);
      const HorizonSolution sol = backward_sweep(model, BackupRule::max_rew_ent(opt.alpha), T,
                                                 Boundary::uninformative(model));
      const std::vector<double> p1 = {0.5, 0.5};
      const RewEntOptimum best = brute_rew_ent(model, T, opt.alpha, p1);
      const double engine = 0.5 * (sol.raw_v(0, 0) + sol.raw_v(0, 1));
      std::cout << "engine " << format_number(engine) << " search " << format_number(best.value)
                << " (" << best.plateau_points << " coarse points within 1e-6)\n";
    } else {
      throw StageError{"oracle", "--kind must be marginals, map, dp or rew-ent", kParse};
    }
  } catch (const OracleBudgetError& e) {
    throw StageError{"oracle", e.what(), kParse};
  } catch (const std::invalid_argument& e) {
    throw StageError{"oracle", e.what(), kParse};
  }
  return kOk;
}

void add_model_flags(CLI::App* cmd, Options& opt, bool map_required = true) {
  auto* map = cmd->add_option("--map", opt.map_path, "map document (text or JSON)");
  if (map_required) map->required()->check(CLI::ExistingFile);
  cmd->add_option("--alpha", opt.alpha, "alpha for sum-max and max-rew-ent");
  cmd->add_option("--beta", opt.beta, "beta for softdp");
  cmd->add_option("--gamma", opt.gamma, "discount factor in (0, 1]");
  cmd->add_option("--tol", opt.tol, "steady-state tolerance on the sup-norm increment");
  cmd->add_option("--max-iter", opt.max_iter, "steady-state iteration cap");
  cmd->add_option("--start", opt.start, "start cell as r,c");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--seed", opt.seed, "seed for sampled rollouts");
  cmd->add_option("--intent", opt.intent, "probability of the intended move");
  cmd->add_option("--goals", opt.goals, "goal cells: absorbing or open")
      ->check(CLI::IsMember({"absorbing", "open"}));
  cmd->add_option("--policy", opt.policy, "policy rows: soft, hard or tempered")
      ->check(CLI::IsMember({"soft", "hard", "tempered"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fgplan: planning as inference on tabular MDPs"};
  app.require_subcommand(1);
  Options opt;

  auto* plan = app.add_subcommand("plan", "solve one rule and write value/q/policy reports");
  add_model_flags(plan, opt);
  plan->add_option("--rule", opt.rule, "rule name, optionally name:param");
  plan->add_option("--horizon", opt.horizon, "finite horizon T (omit for steady state)");
  plan->add_flag("--end-at-goal", opt.end_at_goal, "horizon mode: the last state must be a goal");

  auto* compare = app.add_subcommand("compare", "run several rules on one map");
  add_model_flags(compare, opt);
  compare->add_option("--rule", opt.rules, "rule name[:param], repeatable");
  compare->add_flag("--timing", opt.timing, "also write timing.csv (wall seconds per rule)");

  auto* sweep = app.add_subcommand("sweep", "vary alpha, beta or gamma for one rule");
  add_model_flags(sweep, opt);
  sweep->add_option("--rule", opt.rule, "rule family");
  sweep->add_option("--param", opt.param, "alpha, beta or gamma")->required();
  sweep->add_option("--values", opt.values, "comma-separated values")
      ->required()
      ->delimiter(',');

  auto* decode = app.add_subcommand("decode", "finite-horizon progressive and parallel paths");
  add_model_flags(decode, opt);
  decode->add_option("--rule", opt.rule, "rule name, optionally name:param");
  decode->add_option("--horizon", opt.horizon, "horizon T")->required();
  decode->add_flag("--end-at-goal", opt.end_at_goal, "the last state must be a goal");

  auto* oracle = app.add_subcommand("oracle", "brute-force checks on a random tiny model");
  oracle->group("");
  oracle->add_option("--kind", opt.kind, "marginals, map, dp or rew-ent");
  oracle->add_option("--states", opt.states, "number of states");
  oracle->add_option("--actions", opt.actions, "number of actions");
  oracle->add_option("--horizon", opt.horizon, "horizon T");
  oracle->add_option("--alpha", opt.alpha, "power or entropy weight");
  oracle->add_option("--gamma", opt.gamma, "discount factor");
  oracle->add_option("--seed", opt.seed, "model seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (*plan) return cmd_plan(opt);
    if (*compare) return cmd_compare(opt);
    if (*sweep) return cmd_sweep(opt);
    if (*decode) return cmd_decode(opt);
    if (*oracle) return cmd_oracle(opt);
  } catch (const StageError& e) {
    std::cerr << "fgplan: " << e.stage << ": " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "fgplan: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
