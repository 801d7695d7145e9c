#pragma once

#include <string>

#include <json.hpp>

#include "growth/pipeline.hpp"

namespace growth {

/// Parses a config document. JSON when the first non-space character is '{'
/// or the name hint ends in ".json"; otherwise a TOML subset: `#` comments,
/// [section] and [a.b] headers, `key = value` with strings, numbers,
/// booleans and (nested) inline arrays. Throws std::runtime_error with a
/// line number on malformed input.
nlohmann::json parse_config_text(const std::string& text, const std::string& name_hint = "");

/// Applies override keys onto a preset-initialized config. Recognized:
/// levels, grid{start,end,step}, bins{start,end,source_start,source_end},
/// poly_degree, wlr{enabled,min_level}, lm{max_iterations,tolerance,
/// initial_damping}, smoothing{preset,window_points,local_degree,
/// window_by_age,lower_pad,upper_pad}. Pads take {mode,anchor_age,
/// source_window,target_ages} or null to remove. Unknown keys are errors.
void apply_chart_config(const nlohmann::json& cfg, ChartConfig& config);

}  // namespace growth
