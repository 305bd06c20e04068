#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fgplan/backups.hpp"
#include "fgplan/engine.hpp"
#include "fgplan/model.hpp"
#include "fgplan/policy.hpp"

namespace fgplan {

/// "sum-product", "max-product", "sum-max[:alpha]", "dp", "softdp[:beta]",
/// "max-rew-ent[:alpha]". A missing parameter falls back to `alpha`/`beta`.
/// Throws ParseError on unknown names or out-of-domain parameters.
BackupRule parse_rule(std::string_view text, double alpha = 1.0, double beta = 1.0);

/// Inverse of parse_rule, e.g. "sum-max:3".
std::string rule_spec(const BackupRule& rule);

/// "r,c" with both inside the grid.
Cell parse_cell(std::string_view text, const GridSpec& grid);

/// Shortest round-trip form of x after rounding to 12 significant digits.
std::string format_number(double x);

std::string value_json(const GridSpec& grid, const VTable& v);
std::string q_json(const GridSpec& grid, const QTable& q);
std::string policy_json(const GridSpec& grid, const PolicyTable& policy);

/// "soft", "hard-argmax" or "tempered".
std::string policy_mode_name(PolicyMode mode);

/// One glyph per cell: ^ v < > for orthogonal moves, 7 9 1 3 for diagonals
/// (numeric keypad layout), o for still, * goal, # obstacle, + tie.
std::string arrows_text(const GridSpec& grid, const PolicyTable& policy);
char move_glyph(std::size_t action);

/// "iteration,increment" rows, iteration counted from 1.
std::string convergence_csv(const ConvergenceReport& report);

/// Path as {"cells": [[r, c], ...], "actions": [names], flags...}.
std::string path_json(const GridSpec& grid, const DecodedPath& path);

void write_text_file(const std::string& path, std::string_view text);

}  // namespace fgplan
