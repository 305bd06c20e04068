#include "fgplan/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"

namespace fgplan {

namespace {

using nlohmann::json;

double rounded(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

json grid_header(const GridSpec& grid) {
  return json{{"width", grid.width}, {"height", grid.height}};
}

json action_names() {
  json names = json::array();
  for (auto name : kMoveNames) names.push_back(std::string(name));
  return names;
}

std::string finish(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

BackupRule parse_rule(std::string_view text, double alpha, double beta) {
  const std::size_t colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  std::optional<double> param;
  if (colon != std::string_view::npos) {
    param = parse_double(text.substr(colon + 1));
    if (!param) {
      throw ParseError("rule '" + std::string(text) + "': bad parameter");
    }
  }
  auto no_param = [&](BackupRule rule) {
    if (param) throw ParseError("rule '" + std::string(name) + "' takes no parameter");
    return rule;
  };
  BackupRule rule;
  if (name == "sum-product") {
    rule = no_param(BackupRule::sum_product());
  } else if (name == "max-product") {
    rule = no_param(BackupRule::max_product());
  } else if (name == "dp") {
    rule = no_param(BackupRule::dp());
  } else if (name == "sum-max") {
    rule = {Family::SumMaxProduct, param.value_or(alpha), 1.0};
  } else if (name == "softdp") {
    rule = {Family::SoftDP, 1.0, param.value_or(beta)};
  } else if (name == "max-rew-ent") {
    rule = {Family::MaxRewEnt, param.value_or(alpha), 1.0};
  } else {
    throw ParseError("unknown rule '" + std::string(name) +
                     "' (expected sum-product, max-product, sum-max, dp, softdp "
                     "or max-rew-ent)");
  }
  try {
    rule.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("parameter domain: ") + e.what());
  }
  return rule;
}

std::string rule_spec(const BackupRule& rule) {
  std::string out = family_name(rule.family);
  if (rule.family == Family::SumMaxProduct || rule.family == Family::MaxRewEnt) {
    out += ":" + format_number(rule.alpha);
  } else if (rule.family == Family::SoftDP) {
    out += ":" + format_number(rule.beta);
  }
  return out;
}

Cell parse_cell(std::string_view text, const GridSpec& grid) {
  const std::size_t comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw ParseError("cell '" + std::string(text) + "' must be given as r,c");
  }
  auto count = [&](std::string_view part) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw ParseError("cell '" + std::string(text) + "' must be given as r,c");
    }
    return v;
  };
  const Cell cell{count(text.substr(0, comma)), count(text.substr(comma + 1))};
  if (cell.row >= grid.height || cell.col >= grid.width) {
    throw ParseError("cell " + std::string(text) + " is outside the " +
                     std::to_string(grid.height) + "x" + std::to_string(grid.width) +
                     " grid");
  }
  return cell;
}

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, rounded(x));
  return std::string(buf, ptr);
}

std::string value_json(const GridSpec& grid, const VTable& v) {
  json doc = grid_header(grid);
  json rows = json::array();
  for (std::size_t r = 0; r < grid.height; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < grid.width; ++c) row.push_back(rounded(v[grid.index({r, c})]));
    rows.push_back(std::move(row));
  }
  doc["values"] = std::move(rows);
  return finish(doc);
}

std::string q_json(const GridSpec& grid, const QTable& q) {
  json doc = grid_header(grid);
  doc["actions"] = action_names();
  json rows = json::array();
  for (std::size_t r = 0; r < grid.height; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < grid.width; ++c) {
      json cell = json::array();
      for (double x : q.row(grid.index({r, c}))) cell.push_back(rounded(x));
      row.push_back(std::move(cell));
    }
    rows.push_back(std::move(row));
  }
  doc["q"] = std::move(rows);
  return finish(doc);
}

std::string policy_json(const GridSpec& grid, const PolicyTable& policy) {
  json doc = grid_header(grid);
  doc["mode"] = policy_mode_name(policy.mode());
  doc["actions"] = action_names();
  json rows = json::array();
  json ties = json::array();
  for (std::size_t r = 0; r < grid.height; ++r) {
    json row = json::array();
    json tie_row = json::array();
    for (std::size_t c = 0; c < grid.width; ++c) {
      const std::size_t s = grid.index({r, c});
      json cell = json::array();
      for (double x : policy.row(s)) cell.push_back(rounded(x));
      row.push_back(std::move(cell));
      tie_row.push_back(policy.tie_multiplicity(s));
    }
    rows.push_back(std::move(row));
    ties.push_back(std::move(tie_row));
  }
  doc["policy"] = std::move(rows);
  doc["ties"] = std::move(ties);
  return finish(doc);
}

std::string policy_mode_name(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::Soft: return "soft";
    case PolicyMode::HardArgmax: return "hard-argmax";
    case PolicyMode::Tempered: return "tempered";
  }
  return "soft";
}

char move_glyph(std::size_t action) {
  static constexpr char kGlyphs[kGridActions] = {'7', '^', '9', '<', 'o', '>', '1', 'v', '3'};
  return action < kGridActions ? kGlyphs[action] : '?';
}

std::string arrows_text(const GridSpec& grid, const PolicyTable& policy) {
  std::string out;
  for (std::size_t r = 0; r < grid.height; ++r) {
    for (std::size_t c = 0; c < grid.width; ++c) {
      const std::size_t s = grid.index({r, c});
      char glyph;
      if (grid.is_goal(s)) {
        glyph = '*';
      } else if (grid.is_obstacle(s)) {
        glyph = '#';
      } else if (policy.tie_multiplicity(s) > 1) {
        glyph = '+';
      } else {
        glyph = move_glyph(policy.best_action(s));
      }
      if (c > 0) out += ' ';
      out += glyph;
    }
    out += '\n';
  }
  return out;
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::string out = "iteration,increment\n";
  for (std::size_t k = 0; k < report.increments.size(); ++k) {
    out += std::to_string(k + 1) + "," + format_number(report.increments[k]) + "\n";
  }
  return out;
}

std::string path_json(const GridSpec& grid, const DecodedPath& path) {
  json doc;
  switch (path.mode) {
    case DecodeMode::Parallel: doc["mode"] = "parallel"; break;
    case DecodeMode::Progressive: doc["mode"] = "progressive"; break;
    case DecodeMode::Rollout: doc["mode"] = "rollout"; break;
  }
  json cells = json::array();
  for (std::size_t s : path.states) {
    const Cell c = grid.cell(s);
    cells.push_back({c.row, c.col});
  }
  doc["cells"] = std::move(cells);
  json actions = json::array();
  for (std::size_t a : path.actions) actions.push_back(std::string(kMoveNames[a]));
  doc["actions"] = std::move(actions);
  doc["connected"] = path.connected;
  doc["goal_reached"] = path.goal_reached;
  doc["max_tie_multiplicity"] = path.max_tie_multiplicity;
  return finish(doc);
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace fgplan
