// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fgplan/backups.hpp"
#include "fgplan/engine.hpp"
#include "fgplan/model.hpp"
#include "fgplan/oracle.hpp"
#include "fgplan/policy.hpp"
#include "fgplan/softmax.hpp"

using namespace fgplan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string fixed3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

GridSpec map_file(const char* name) {
  return load_map_file(std::string(FGPLAN_DATA) + "/" + name);
}

struct Instance {
  MdpModel model;
  std::size_t horizon;
};

// the shared pool for criteria 1-3
std::vector<Instance> small_instances() {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::size_t> ds(1, 4), da(1, 3), dt(1, 3);
  std::vector<Instance> out;
  for (int i = 0; i < 50; ++i) {
    const std::size_t S = ds(rng), A = da(rng), T = dt(rng);
    out.push_back({random_model(rng(), S, A), T});
  }
  return out;
}

Outcome c1_sum_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const Instance& in : small_instances()) {
    const Boundary b = Boundary::uninformative(in.model);
    const auto engine = posteriors(solve_horizon(in.model, BackupRule::sum_product(), in.horizon, b));
    const auto brute = brute_marginals(in.model, in.horizon, b, 1.0);
    for (std::size_t t = 0; t < in.horizon; ++t) worst = std::max(worst, sup_diff(engine[t], brute[t]));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs < 5.0,
          "50 models, max |diff| " + num(worst) + " (tol 1e-10), " + fixed3(secs) + " s (limit 5)"};
}

Outcome c2_summax_oracle() {
  double worst = 0.0;
  for (double alpha : {2.0, 3.0}) {
    for (const Instance& in : small_instances()) {
      const Boundary b = Boundary::uninformative(in.model);
      const auto engine =
          posteriors(solve_horizon(in.model, BackupRule::sum_max(alpha), in.horizon, b));
      const auto brute = brute_marginals(in.model, in.horizon, b, alpha);
      for (std::size_t t = 0; t < in.horizon; ++t)
        worst = std::max(worst, sup_diff(engine[t], brute[t]));
    }
  }
  return {worst <= 1e-9, "alpha 2 and 3 on 50 models, max |diff| " + num(worst) + " (tol 1e-9)"};
}

Outcome c3_map_oracle() {
  double worst = 0.0;
  std::size_t same = 0, tied = 0, mismatched = 0;
  for (const Instance& in : small_instances()) {
    const Boundary b = Boundary::uninformative(in.model);
    const HorizonSolution sol = solve_horizon(in.model, BackupRule::max_product(), in.horizon, b);
    const DecodedPath path = progressive_decode(in.model, sol);
    const MapSequence best = brute_map(in.model, in.horizon, b);
    worst = std::max(worst, std::abs(path_log_weight(in.model, b, path) - best.log_weight));
    // max over s of initial + V_1, the unnormalised message value
    double top = -INFINITY;
    for (std::size_t s = 0; s < in.model.n_states(); ++s)
      top = std::max(top, b.initial[s] + sol.raw_v(0, s));
    worst = std::max(worst, std::abs(top - best.log_weight));
    const bool equal = path.states == best.states && path.actions == best.actions;
    if (equal) ++same;
    else if (best.multiplicity > 1) ++tied;
    else ++mismatched;
  }
  return {mismatched == 0 && worst <= 1e-10,
          std::to_string(same) + " identical, " + std::to_string(tied) + " differ only among tied optima, " +
              std::to_string(mismatched) + " wrong; max score |diff| " + num(worst) + " (tol 1e-10)"};
}

Outcome c4_dp_oracle() {
  double worst = 0.0;
  std::mt19937_64 rng(4);
  for (double gamma : {0.5, 1.0}) {
    for (int i = 0; i < 25; ++i) {
      const MdpModel m = random_model(rng(), 2, 2, gamma);
      const HorizonSolution sol = backward_sweep(m, BackupRule::dp(), 2, Boundary::uninformative(m));
      const auto brute = brute_dp_value(m, 2);
      for (std::size_t s = 0; s < 2; ++s) worst = std::max(worst, std::abs(sol.raw_v(0, s) - brute[s]));
    }
  }
  return {worst <= 1e-10, "gamma 0.5 and 1, 25 models each, max |diff| " + num(worst) + " (tol 1e-10)"};
}

Outcome c5_rew_ent() {
  const std::vector<double> p1 = {0.5, 0.5};
  std::mt19937_64 rng(5);
  double worst = 0.0, worst_limit = 0.0;
  for (int i = 0; i < 3; ++i) {
    const MdpModel m = random_model(rng(), 2, 2);
    auto engine_value = [&](double alpha) {
      const HorizonSolution sol =
          backward_sweep(m, BackupRule::max_rew_ent(alpha), 2, Boundary::uninformative(m));
      return p1[0] * sol.raw_v(0, 0) + p1[1] * sol.raw_v(0, 1);
    };
    for (double alpha : {0.5, 1.0, 2.0}) {
      worst = std::max(worst, std::abs(engine_value(alpha) - brute_rew_ent(m, 2, alpha, p1).value));
    }
    const auto dp = brute_dp_value(m, 2);
    const double dp_value = p1[0] * dp[0] + p1[1] * dp[1];
    worst_limit = std::max(worst_limit, std::abs(engine_value(1e3) - dp_value));
    worst_limit = std::max(worst_limit, std::abs(brute_rew_ent(m, 2, 1e3, p1).value - dp_value));
  }
  return {worst <= 2e-6 && worst_limit <= 5e-3,
          "alpha 0.5/1/2 max |diff| " + num(worst) + " (tol 2e-6); alpha 1e3 vs dp " + num(worst_limit) +
              " (tol 5e-3)"};
}

Outcome c6_coincidences() {
  const MdpModel m = build_grid_model(map_file("paper_6x6.map"), 1.0);
  const SteadyState dp = steady_state(m, BackupRule::dp());
  const SteadyState mp = steady_state(m, BackupRule::max_product());
  const SteadyState sp = steady_state(m, BackupRule::sum_product());
  const SteadyState re = steady_state(m, BackupRule::max_rew_ent(1.0));
  const double d1 = sup_diff(dp.v.values(), mp.v.values());
  const double d2 = sup_diff(sp.v.values(), re.v.values());
  std::size_t stochastic = 0;
  for (std::size_t s = 0; s < m.n_states(); ++s)
    for (std::size_t a = 0; a < m.n_actions(); ++a) stochastic += m.successors(s, a).size() > 1 ? 1 : 0;
  return {d1 <= 1e-9 && d2 <= 1e-9,
          "intent 1: |dp - max| " + num(d1) + ", |sum - rew-ent(1)| " + num(d2) + " (tol 1e-9); " +
              std::to_string(stochastic) + " border rows still stochastic"};
}

std::vector<BackupRule> paper_rules() {
  return {BackupRule::sum_product(),   BackupRule::max_product(),     BackupRule::sum_max(3.0),
          BackupRule::soft_dp(0.2),    BackupRule::soft_dp(0.6),      BackupRule::dp(),
          BackupRule::max_rew_ent(0.2), BackupRule::max_rew_ent(1.0), BackupRule::max_rew_ent(6.0)};
}

Outcome c7_small_grid() {
  const auto t0 = Clock::now();
  const GridSpec g = map_file("paper_6x6.map");
  const MdpModel m = build_grid_model(g, 0.5);
  const auto goals = g.goal_states();
  std::size_t converged = 0, failures = 0, longest = 0, cells = 0;
  for (const BackupRule& rule : paper_rules()) {
    const SteadyState ss = steady_state(m, rule);
    if (ss.report.terminated_by == Termination::Tolerance) ++converged;
    const PolicyTable p = extract_policy(ss.q, ss.v);
    for (std::size_t s = 0; s < m.n_states(); ++s) {
      if (g.is_obstacle(s)) continue;
      ++cells;
      const DecodedPath path = greedy_rollout(m, p, s, 36, goals);
      if (!path.goal_reached) ++failures;
      longest = std::max(longest, path.actions.size());
    }
  }
  const double secs = seconds_since(t0);
  return {converged == 9 && failures == 0 && secs < 2.0,
          std::to_string(converged) + "/9 rules converged, " + std::to_string(failures) +
              " failed rollouts of " + std::to_string(cells) + ", longest " + std::to_string(longest) +
              " steps, " + fixed3(secs) + " s (limit 2)"};
}

Outcome c8_ordering() {
  const auto t0 = Clock::now();
  const MdpModel m = build_grid_model(map_file("semantic_17x23.map"), 0.5);
  std::vector<std::size_t> it;
  std::string counts;
  bool all_converged = true;
  for (const BackupRule& rule : paper_rules()) {
    const SteadyState ss = steady_state(m, rule);
    all_converged = all_converged && ss.report.terminated_by == Termination::Tolerance;
    it.push_back(ss.report.iterations);
    counts += (counts.empty() ? "" : " ") + std::to_string(ss.report.iterations);
  }
  // order: sum, max, sum-max3, softdp .2, softdp .6, dp, rew-ent .2, 1, 6
  const std::size_t slow = *std::min_element(it.begin() + 3, it.end());
  const double secs = seconds_since(t0);
  const bool ok = all_converged && it[1] < it[2] && it[2] < it[0] && it[0] < slow && secs < 30.0;
  return {ok, "max " + std::to_string(it[1]) + " < sum-max(3) " + std::to_string(it[2]) + " < sum " +
                  std::to_string(it[0]) + " < min(dp family) " + std::to_string(slow) + "; all: " + counts +
                  "; " + fixed3(secs) + " s (limit 30)"};
}

Outcome c9_entropy() {
  const MdpModel m = build_grid_model(map_file("semantic_17x23.map"), 0.5);
  auto entropies = [&](const BackupRule& rule) {
    const SteadyState ss = steady_state(m, rule);
    return std::pair{mean_entropy(extract_policy(ss.q, ss.v)), mean_entropy(tempered_policy(rule, ss.q, ss.v))};
  };
  const auto r02 = entropies(BackupRule::max_rew_ent(0.2));
  const auto r1 = entropies(BackupRule::max_rew_ent(1.0));
  const auto r6 = entropies(BackupRule::max_rew_ent(6.0));
  const auto s02 = entropies(BackupRule::soft_dp(0.2));
  const auto s06 = entropies(BackupRule::soft_dp(0.6));
  const auto dp = entropies(BackupRule::dp());
  const bool ok = r02.first > r1.first && r1.first > r6.first && s02.first > s06.first &&
                  s06.first > dp.first;
  const bool tempered_ok = r02.second > r1.second && r1.second > r6.second &&
                           s02.second > s06.second && s06.second > dp.second;
  return {ok, "exp(Q-V): rew-ent 0.2/1/6 " + fixed3(r02.first) + "/" + fixed3(r1.first) + "/" +
                  fixed3(r6.first) + ", softdp 0.2/0.6 " + fixed3(s02.first) + "/" + fixed3(s06.first) +
                  " dp " + fixed3(dp.first) + "; tempered: " + fixed3(r02.second) + "/" +
                  fixed3(r1.second) + "/" + fixed3(r6.second) + ", " + fixed3(s02.second) + "/" +
                  fixed3(s06.second) + " dp " + fixed3(dp.second) +
                  (tempered_ok ? " (tempered trend holds)" : " (tempered trend broken)")};
}

Outcome c10_softmax() {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> len(2, 16);
  std::uniform_real_distribution<double> val(-20.0, 5.0), narrow(-3.0, 3.0), alpha_d(0.05, 50.0),
      pos(1e-3, 4.0), halpha(1.0, 20.0);
  // bounds, limit, small alpha, r_beta, h/g duality
  std::size_t broken[5] = {0, 0, 0, 0, 0};
  auto fill = [&](std::size_t n, auto& dist) {
    std::vector<double> x(n);
    for (double& v : x) v = dist(rng);
    return x;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto x = fill(len(rng), val);
    const double mx = *std::max_element(x.begin(), x.end());
    const double mn = *std::min_element(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    const double a = alpha_d(rng);
    const double g = g_alpha(x, a);
    if (!(g >= mx - 1e-12 && g <= mx + std::log(n) / a + 1e-12)) ++broken[0];
    const double g10 = g_alpha(x, 10.0), g100 = g_alpha(x, 100.0);
    if (!(g10 >= g100 && g100 >= mx)) ++broken[1];

    // the gap at alpha = 1e-4 is about alpha * var(x) / 2, so keep the spread moderate
    const auto y = fill(x.size(), narrow);
    double mean = 0.0;
    for (double v : y) mean += v / n;
    if (!(std::abs(g_alpha(y, 1e-4) - std::log(n) / 1e-4 - mean) < 1e-3)) ++broken[2];

    double prev = -INFINITY;
    for (double beta : {0.0, 0.3, 1.0, 4.0, 30.0}) {
      const double r = r_beta(x, beta);
      if (!(r >= mn - 1e-12 && r <= mx + 1e-12 && r >= prev - 1e-12)) ++broken[3];
      prev = r;
    }
    const auto p = fill(x.size(), pos);
    std::vector<double> lp(p.size());
    std::transform(p.begin(), p.end(), lp.begin(), [](double v) { return std::log(v); });
    const double ha = halpha(rng);
    const double h = h_alpha(p, ha), via = std::exp(g_alpha(lp, ha));
    if (!(std::abs(h - via) <= 1e-10 * via)) ++broken[4];
  }
  std::size_t total = 0;
  for (std::size_t b : broken) total += b;
  return {total == 0, "1000 vectors per property; violations: g bounds " + std::to_string(broken[0]) +
                          ", g limit " + std::to_string(broken[1]) + ", small alpha " +
                          std::to_string(broken[2]) + ", r_beta " + std::to_string(broken[3]) +
                          ", h/g duality " + std::to_string(broken[4])};
}

Outcome c11_duality() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> dim(2, 6);
  std::uniform_real_distribution<double> u(-5.0, 0.0);
  const std::vector<BackupRule> rules = {BackupRule::sum_product(), BackupRule::max_product(),
                                         BackupRule::sum_max(3.0),  BackupRule::dp(),
                                         BackupRule::soft_dp(0.6),  BackupRule::max_rew_ent(0.5)};
  double worst = 0.0;
  auto rel = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      d = std::max(d, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
    return d;
  };
  for (int i = 0; i < 100; ++i) {
    const MdpModel m = random_model(rng(), dim(rng), dim(rng));
    VTable v(m.n_states()), b(m.n_states());
    for (std::size_t s = 0; s < m.n_states(); ++s) {
      v[s] = u(rng);
      b[s] = std::exp(v[s]);
    }
    for (const BackupRule& rule : rules) {
      const QTable q = backup_q(rule, m, v);
      const QTable bq = backup_q_prob(rule, m, b);
      const double qmax = *std::max_element(q.values().begin(), q.values().end());
      std::vector<double> eq;
      for (double x : q.values()) eq.push_back(std::exp(x - qmax));
      worst = std::max(worst, rel(eq, bq.values()));
      const VTable lv = backup_v(rule, q);
      const VTable pv = backup_v_prob(rule, bq);
      const double vmax = *std::max_element(lv.values().begin(), lv.values().end());
      std::vector<double> ev;
      for (double x : lv.values()) ev.push_back(std::exp(x - vmax));
      worst = std::max(worst, rel(ev, pv.values()));
    }
  }
  return {worst <= 1e-9, "100 models x 6 families, max relative diff " + num(worst) + " (tol 1e-9)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c12_determinism() {
  const fs::path root = fs::temp_directory_path() / ("fgplan_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<fs::path> dirs = {root / "a", root / "b"};
  for (const fs::path& d : dirs) {
    const std::string cmd = std::string(FGPLAN_BIN) + " compare --map " + FGPLAN_DATA +
                            "/semantic_17x23.map --start 8,11 --out " + d.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      fs::remove_all(root);
      return {false, "compare exited with status " + std::to_string(status)};
    }
  }
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dirs[0])) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::size_t differing = 0;
  for (const std::string& n : names) differing += slurp(dirs[0] / n) != slurp(dirs[1] / n) ? 1 : 0;
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dirs[1])) ++count_b;
  fs::remove_all(root);
  std::string list;
  for (const std::string& n : names) list += (list.empty() ? "" : ", ") + n;
  return {differing == 0 && count_b == names.size() && !names.empty(),
          std::to_string(names.size()) + " files (" + list + "), " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence, sum-product", c1_sum_oracle},
      {"oracle equivalence, sum/max-product", c2_summax_oracle},
      {"oracle equivalence, max-product MAP", c3_map_oracle},
      {"oracle equivalence, DP", c4_dp_oracle},
      {"reward/entropy functional", c5_rew_ent},
      {"deterministic coincidences", c6_coincidences},
      {"small-grid behaviour", c7_small_grid},
      {"convergence ordering", c8_ordering},
      {"entropy monotonicity", c9_entropy},
      {"soft-max properties", c10_softmax},
      {"space duality", c11_duality},
      {"compare determinism", c12_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
