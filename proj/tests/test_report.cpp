#include <string>
#include <vector>

#include "doctest.h"
#include "fgplan/report.hpp"
#include "json.hpp"

using namespace fgplan;
using nlohmann::json;

namespace {

GridSpec tiny_grid() {
  return load_map("grid 3 2\nclass G 0\nclass . -1\nclass # -10\ngoal-class G\n.#G\n...\n");
}

}  // namespace

TEST_CASE("rule names") {
  CHECK(parse_rule("sum-product").family == Family::SumProduct);
  CHECK(parse_rule("max-product").family == Family::MaxProduct);
  CHECK(parse_rule("dp").family == Family::DP);
  const BackupRule sm = parse_rule("sum-max:3");
  CHECK(sm.family == Family::SumMaxProduct);
  CHECK(sm.alpha == 3.0);
  CHECK(parse_rule("sum-max", 2.5).alpha == 2.5);
  CHECK(parse_rule("softdp", 1.0, 0.2).beta == 0.2);
  CHECK(parse_rule("max-rew-ent:0.2").alpha == 0.2);
  for (const char* spec : {"sum-product", "max-product", "sum-max:3", "dp", "softdp:0.6",
                           "max-rew-ent:6"}) {
    CHECK(rule_spec(parse_rule(spec)) == spec);
  }
  CHECK_THROWS_AS(parse_rule("bogus"), ParseError);
  CHECK_THROWS_AS(parse_rule("sum-max:0.5"), ParseError);
  CHECK_THROWS_AS(parse_rule("softdp:-1"), ParseError);
  CHECK_THROWS_AS(parse_rule("softdp:abc"), ParseError);
  try {
    parse_rule("softdp", 1.0, -1.0);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("parameter domain") != std::string::npos);
  }
}

TEST_CASE("cells") {
  const GridSpec g = tiny_grid();
  CHECK(parse_cell("1,2", g) == Cell{1, 2});
  CHECK(parse_cell("0,1", g) == Cell{0, 1});
  CHECK_THROWS_AS(parse_cell("0,1,2", g), ParseError);
  CHECK_THROWS_AS(parse_cell("2,0", g), ParseError);
  CHECK_THROWS_AS(parse_cell("0", g), ParseError);
  CHECK_THROWS_AS(parse_cell("a,b", g), ParseError);
  CHECK_THROWS_AS(parse_cell("-1,0", g), ParseError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(-2.0 / 3.0) == "-0.666666666667");
  CHECK(format_number(1e-5) == "1e-05");
  CHECK(format_number(0.1 + 0.2) == "0.3");
  CHECK(format_number(-0.0) == format_number(0.0));
}

TEST_CASE("json tables") {
  const GridSpec g = tiny_grid();
  VTable v(6);
  for (std::size_t s = 0; s < 6; ++s) v[s] = -0.1 * static_cast<double>(s);
  const json jv = json::parse(value_json(g, v));
  CHECK(jv["width"] == 3);
  CHECK(jv["height"] == 2);
  REQUIRE(jv["values"].size() == 2);
  CHECK(jv["values"][1][2].get<double>() == -0.5);

  QTable q(6, kGridActions, -1.0);
  q(2, 4) = 0.0;
  const json jq = json::parse(q_json(g, q));
  CHECK(jq["actions"].size() == kGridActions);
  CHECK(jq["actions"][4] == "still");
  CHECK(jq["q"][0][2][4].get<double>() == 0.0);

  const PolicyTable p = extract_policy(q, backup_v(BackupRule::max_product(), q));
  const json jp = json::parse(policy_json(g, p));
  CHECK(jp["mode"] == "soft");
  CHECK(jp["ties"][0][0] == kGridActions);
  CHECK(jp["ties"][0][2] == 1);
  const std::string text = policy_json(g, p);
  CHECK(text.back() == '\n');
}

TEST_CASE("arrows") {
  const std::string glyphs = "7^9<o>1v3";
  for (std::size_t a = 0; a < kGridActions; ++a) CHECK(move_glyph(a) == glyphs[a]);
  const GridSpec g = tiny_grid();
  QTable q(6, kGridActions, -2.0);
  q(0, static_cast<std::size_t>(Move::Right)) = -1.0;
  q(3, static_cast<std::size_t>(Move::UpRight)) = -1.0;
  q(4, static_cast<std::size_t>(Move::Up)) = -1.0;
  q(5, static_cast<std::size_t>(Move::Up)) = -1.0;
  q(5, static_cast<std::size_t>(Move::UpLeft)) = -1.0;
  const PolicyTable p = extract_policy(q, backup_v(BackupRule::max_product(), q));
  CHECK(arrows_text(g, p) == "> # *\n9 ^ +\n");
  CHECK(policy_mode_name(PolicyMode::HardArgmax) == "hard-argmax");
}

TEST_CASE("convergence and path output") {
  ConvergenceReport r;
  r.increments = {0.5, 0.25};
  r.iterations = 2;
  CHECK(convergence_csv(r) == "iteration,increment\n1,0.5\n2,0.25\n");

  const GridSpec g = tiny_grid();
  DecodedPath path;
  path.states = {3, 4, 2};
  path.actions = {static_cast<std::size_t>(Move::Right), static_cast<std::size_t>(Move::UpRight)};
  path.mode = DecodeMode::Progressive;
  path.goal_reached = true;
  const json jp = json::parse(path_json(g, path));
  CHECK(jp["mode"] == "progressive");
  CHECK(jp["cells"][2][0] == 0);
  CHECK(jp["cells"][2][1] == 2);
  CHECK(jp["actions"][1] == "up-right");
  CHECK(jp["goal_reached"] == true);
}
