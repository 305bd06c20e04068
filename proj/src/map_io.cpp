#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fgplan/model.hpp"
#include "json.hpp"

namespace fgplan {

namespace {

constexpr std::string_view kCanonicalClasses = "G.sg#";

double parse_reward(std::string_view token, std::size_t line_no) {
  if (token == "-inf" || token == "-Inf" || token == "-infinity") {
    return -std::numeric_limits<double>::infinity();
  }
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad reward '" +
                     std::string(token) + "'");
  }
  return value;
}

std::size_t parse_count(std::string_view token, std::size_t line_no) {
  std::size_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad count '" +
                     std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) words.push_back(line.substr(start, i - start));
  }
  return words;
}

// Shared by both front ends: rows are checked for width and every character
// must name a declared class.
void fill_cells(GridSpec& grid, const std::vector<std::string>& rows) {
  if (grid.width == 0 || grid.height == 0) {
    throw ParseError("empty grid");
  }
  if (rows.size() != grid.height) {
    throw ParseError("expected " + std::to_string(grid.height) +
                     " rows, found " + std::to_string(rows.size()));
  }
  grid.cells.clear();
  grid.goals.clear();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != grid.width) {
      throw ParseError("row " + std::to_string(r) + " has " +
                       std::to_string(rows[r].size()) + " cells, expected " +
                       std::to_string(grid.width));
    }
    for (std::size_t c = 0; c < grid.width; ++c) {
      const char k = rows[r][c];
      if (!grid.class_rewards.contains(k)) {
        const bool canonical =
            kCanonicalClasses.find(k) != std::string_view::npos;
        throw ParseError((canonical ? "class without reward entry '"
                                    : "unknown class character '") +
                         std::string(1, k) + "' at row " + std::to_string(r) +
                         ", column " + std::to_string(c));
      }
      grid.cells.push_back(k);
      if (k == grid.goal_class) grid.goals.push_back({r, c});
    }
  }
  check_grid(grid);
}

GridSpec load_text_map(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(start, end - start));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
      start = end + 1;
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("empty grid");

  GridSpec grid;
  std::size_t i = 0;
  const auto header = split_words(lines[i]);
  if (header.size() != 3 || header[0] != "grid") {
    throw ParseError("line 1: expected 'grid <width> <height>'");
  }
  grid.width = parse_count(header[1], 1);
  grid.height = parse_count(header[2], 1);
  ++i;

  bool have_goal_class = false;
  for (; i < lines.size(); ++i) {
    const auto words = split_words(lines[i]);
    if (words.empty()) {
      throw ParseError("line " + std::to_string(i + 1) + ": blank line in header");
    }
    if (words[0] == "class") {
      if (words.size() != 3 || words[1].size() != 1) {
        throw ParseError("line " + std::to_string(i + 1) +
                         ": expected 'class <char> <reward>'");
      }
      const double reward = parse_reward(words[2], i + 1);
      if (std::isnan(reward) || reward > 0.0) {
        throw ParseError("line " + std::to_string(i + 1) +
                         ": class reward must be <= 0");
      }
      if (!grid.class_rewards.emplace(words[1][0], reward).second) {
        throw ParseError("line " + std::to_string(i + 1) + ": class '" +
                         std::string(words[1]) + "' declared twice");
      }
    } else if (words[0] == "goal-class") {
      if (words.size() != 2 || words[1].size() != 1) {
        throw ParseError("line " + std::to_string(i + 1) +
                         ": expected 'goal-class <char>'");
      }
      grid.goal_class = words[1][0];
      have_goal_class = true;
    } else {
      break;
    }
  }
  if (!have_goal_class) throw ParseError("missing 'goal-class' line");
  if (!grid.class_rewards.contains(grid.goal_class)) {
    throw ParseError(std::string("goal class '") + grid.goal_class +
                     "' has no reward entry");
  }

  std::vector<std::string> rows(lines.begin() + static_cast<long>(i), lines.end());
  fill_cells(grid, rows);
  return grid;
}

GridSpec load_json_map(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON map: ") + e.what());
  }
  GridSpec grid;
  try {
    grid.width = doc.at("width").get<std::size_t>();
    grid.height = doc.at("height").get<std::size_t>();
    for (const auto& [key, value] : doc.at("classes").items()) {
      if (key.size() != 1) {
        throw ParseError("class key '" + key + "' must be one character");
      }
      const double reward = value.is_string()
                                ? parse_reward(value.get<std::string>(), 0)
                                : value.get<double>();
      if (std::isnan(reward) || reward > 0.0) {
        throw ParseError("class '" + key + "' reward must be <= 0");
      }
      grid.class_rewards.emplace(key[0], reward);
    }
    const auto goal = doc.at("goal_class").get<std::string>();
    if (goal.size() != 1) throw ParseError("goal_class must be one character");
    grid.goal_class = goal[0];
    if (!grid.class_rewards.contains(grid.goal_class)) {
      throw ParseError("goal class '" + goal + "' has no reward entry");
    }
    fill_cells(grid, doc.at("rows").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed JSON map: ") + e.what());
  }
  return grid;
}

}  // namespace

GridSpec load_map(std::string_view text) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw ParseError("empty grid");
  return text[first] == '{' ? load_json_map(text) : load_text_map(text);
}

GridSpec load_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open map file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_map(buf.str());
}

}  // namespace fgplan
