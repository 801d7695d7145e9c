#pragma once

#include <string>

#include "growth/lms.hpp"

namespace growth {

struct SvgStyle {
  int width = 860;
  int height = 620;
  double margin_left = 64.0;
  double margin_right = 58.0;
  double margin_top = 34.0;
  double margin_bottom = 52.0;
  std::string title;  // default: "<measure>-for-age (<sex>)"
};

/// Percentile fan chart as a standalone SVG 1.1 document: one polyline per
/// level, x ticks at whole years, y ticks at round values, each level
/// labelled at the right edge. Pure function of its inputs (byte-identical
/// output for equal input). Throws std::invalid_argument on an empty chart.
std::string render_svg(const ChartCurveSet& chart, const SvgStyle& style = {});

}  // namespace growth
