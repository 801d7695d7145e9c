#include "growth/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace growth {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// Largest of 1, 2, 5 x 10^k giving at most max_ticks intervals over span.
double nice_step(double span, int max_ticks) {
  double step = std::pow(10.0, std::ceil(std::log10(span / max_ticks)));
  for (double m : {0.1, 0.2, 0.5}) {
    if (span / (step * m) <= max_ticks) return step * m;
  }
  return step;
}

}  // namespace

std::string render_svg(const ChartCurveSet& chart, const SvgStyle& style) {
  if (chart.ages.empty() || chart.levels.empty())
    throw std::invalid_argument("render_svg: empty chart");

  const double age_lo = chart.ages.front();
  const double age_hi = chart.ages.back();
  double v_lo = chart.levels.front().values.front();
  double v_hi = v_lo;
  for (const LevelCurve& c : chart.levels) {
    for (double v : c.values) {
      v_lo = std::min(v_lo, v);
      v_hi = std::max(v_hi, v);
    }
  }
  const double v_pad = std::max((v_hi - v_lo) * 0.05, 1e-9);
  v_lo -= v_pad;
  v_hi += v_pad;
  const double age_span = std::max(age_hi - age_lo, 1e-9);

  const double plot_w = style.width - style.margin_left - style.margin_right;
  const double plot_h = style.height - style.margin_top - style.margin_bottom;
  auto px = [&](double age) { return style.margin_left + (age - age_lo) / age_span * plot_w; };
  auto py = [&](double v) { return style.margin_top + (v_hi - v) / (v_hi - v_lo) * plot_h; };

  std::string svg;
  svg.reserve(16384);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                style.width, style.height, style.width, style.height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const std::string title =
      style.title.empty() ? to_string(chart.measure) + "-for-age (" + to_string(chart.sex) + ")"
                          : style.title;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"14\" "
                "text-anchor=\"middle\">%s</text>\n",
                style.margin_left + plot_w / 2.0, style.margin_top - 12.0, title.c_str());
  svg += buf;

  // Grid and ticks.
  svg += "<g stroke=\"#d0d0d0\" stroke-width=\"1\">\n";
  for (int age = static_cast<int>(std::ceil(age_lo - 1e-9));
       age <= static_cast<int>(std::floor(age_hi + 1e-9)); ++age) {
    const double x = px(age);
    std::snprintf(buf, sizeof(buf), "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n", x,
                  style.margin_top, x, style.margin_top + plot_h);
    svg += buf;
  }
  const double step = nice_step(v_hi - v_lo, 10);
  const double tick0 = std::ceil(v_lo / step) * step;
  for (double v = tick0; v <= v_hi + 1e-9 * step; v += step) {
    const double y = py(v);
    std::snprintf(buf, sizeof(buf), "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n",
                  style.margin_left, y, style.margin_left + plot_w, y);
    svg += buf;
  }
  svg += "</g>\n";

  svg += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int age = static_cast<int>(std::ceil(age_lo - 1e-9));
       age <= static_cast<int>(std::floor(age_hi + 1e-9)); ++age) {
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%d</text>\n", px(age),
                  style.margin_top + plot_h + 16.0, age);
    svg += buf;
  }
  for (double v = tick0; v <= v_hi + 1e-9 * step; v += step) {
    std::snprintf(buf, sizeof(buf), "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%s</text>\n",
                  style.margin_left - 6.0, py(v) + 4.0, fmt("%g", v).c_str());
    svg += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">age (years)</text>\n",
                style.margin_left + plot_w / 2.0, style.margin_top + plot_h + 36.0);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 %.2f %.2f)\">%s</text>\n",
                16.0, style.margin_top + plot_h / 2.0, 16.0, style.margin_top + plot_h / 2.0,
                unit_of(chart.measure).c_str());
  svg += buf;
  svg += "</g>\n";

  // Frame.
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" "
                "stroke=\"#333\" stroke-width=\"1\"/>\n",
                style.margin_left, style.margin_top, plot_w, plot_h);
  svg += buf;

  for (const LevelCurve& c : chart.levels) {
    const bool median = std::fabs(c.level - 50.0) < 1e-9;
    std::snprintf(buf, sizeof(buf), "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"%s\" points=\"",
                  median ? "#b02a2a" : "#1f5fa8", median ? "2" : "1.2");
    svg += buf;
    for (std::size_t i = 0; i < chart.ages.size(); ++i) {
      if (i) svg += ' ';
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f", px(chart.ages[i]), py(c.values[i]));
      svg += buf;
    }
    svg += "\"/>\n";
  }

  svg += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (const LevelCurve& c : chart.levels) {
    std::snprintf(buf, sizeof(buf), "<text x=\"%.2f\" y=\"%.2f\">%s</text>\n",
                  style.margin_left + plot_w + 5.0, py(c.values.back()) + 4.0,
                  fmt("%g", c.level).c_str());
    svg += buf;
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace growth
