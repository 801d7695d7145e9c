#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "growth/config.hpp"
#include "growth/csv.hpp"
#include "growth/pipeline.hpp"
#include "growth/svg.hpp"
#include "growth/synth.hpp"

namespace {

bool verbose() {
  const char* v = std::getenv("GROWTHCHART_VERBOSE");
  return v && *v && std::strcmp(v, "0") != 0;
}

void info(const std::string& msg) {
  if (verbose()) std::cerr << "[growthchart] " << msg << '\n';
}

/// Whole-file atomic write: temp file in place, then rename.
void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot replace " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

growth::LmsTable load_lms_file(const std::string& path, growth::Measure measure) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return growth::load_lms_table(in, measure);
}

std::string default_model_path(const std::string& out) {
  const std::size_t dot = out.rfind('.');
  const std::size_t slash = out.find_last_of("/\\");
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
    return out.substr(0, dot) + ".model.json";
  return out + ".model.json";
}

growth::GridSpec parse_grid(const std::string& text) {
  growth::GridSpec grid;
  const std::size_t c1 = text.find(':');
  const std::size_t c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::runtime_error("grid must be start:end:step");
  const auto lo = growth::csv::parse_double(text.substr(0, c1));
  const auto hi = growth::csv::parse_double(text.substr(c1 + 1, c2 - c1 - 1));
  const auto st = growth::csv::parse_double(text.substr(c2 + 1));
  if (!lo || !hi || !st) throw std::runtime_error("grid must be start:end:step (numbers)");
  grid.start = *lo;
  grid.end = *hi;
  grid.step = *st;
  return grid;
}

struct BuildArgs {
  std::string input, measure = "weight", sex, preset = "generic", out;
  std::string config_path, svg_path, emit_empirical, emit_report, out_model;
};

int run_build(const BuildArgs& args) {
  growth::ChartConfig config = growth::ChartConfig::preset(
      growth::parse_measure(args.measure), growth::parse_sex(args.sex),
      growth::parse_schema(args.preset));
  if (!args.config_path.empty()) {
    const nlohmann::json cfg =
        growth::parse_config_text(read_file(args.config_path), args.config_path);
    growth::apply_chart_config(cfg, config);
    info("applied config overrides from " + args.config_path);
  }

  std::ifstream in(args.input, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + args.input);
  const growth::ChartBuildResult result = growth::build_chart_from_stream(in, config);

  info("rows: " + std::to_string(result.exclusions.total_rows) + ", accepted " +
       std::to_string(result.exclusions.accepted) + ", rejected " +
       std::to_string(result.exclusions.rejected_total()));
  std::vector<double> failed_levels;
  for (const growth::LevelModel& m : result.models) {
    info("level " + growth::csv::format_sig(m.level, 6) +
         ": sse=" + growth::csv::format_sig(m.fit.sse, 6) +
         " iterations=" + std::to_string(m.fit.iterations) +
         (m.fit.converged ? "" : " (no convergence)"));
    if (!m.fit.converged) failed_levels.push_back(m.level);
  }
  if (!failed_levels.empty()) {
    std::cerr << "error: fit did not converge for level(s):";
    for (double level : failed_levels) std::cerr << ' ' << growth::csv::format_sig(level, 6);
    std::cerr << '\n';
    return 2;
  }

  std::ostringstream chart_csv;
  growth::write_chart_csv(chart_csv, result.chart);
  atomic_write(args.out, chart_csv.str());

  const std::string model_path =
      args.out_model.empty() ? default_model_path(args.out) : args.out_model;
  atomic_write(model_path, result.to_json(config).dump(2) + "\n");

  if (!args.svg_path.empty()) atomic_write(args.svg_path, growth::render_svg(result.chart));
  if (!args.emit_empirical.empty()) {
    std::ostringstream ss;
    growth::write_series_csv(ss, result.empirical);
    atomic_write(args.emit_empirical, ss.str());
  }
  if (!args.emit_report.empty()) {
    nlohmann::json report = result.to_json(config);
    nlohmann::json diags = nlohmann::json::array();
    for (const growth::RowDiagnostic& d : result.diagnostics)
      diags.push_back({{"line", d.line}, {"message", d.message}, {"fatal", d.fatal_for_row}});
    report["diagnostics"] = diags;
    atomic_write(args.emit_report, report.dump(2) + "\n");
  }
  return 0;
}

struct ReferenceArgs {
  std::string lms, sex, measure = "weight", grid = "2:20:0.25", out;
  std::vector<double> levels;
};

int run_reference(const ReferenceArgs& args) {
  const growth::Measure measure = growth::parse_measure(args.measure);
  const growth::LmsTable table = load_lms_file(args.lms, measure);
  std::vector<double> levels = args.levels;
  if (levels.empty()) levels = growth::chart_levels(measure);
  const growth::GridSpec grid = parse_grid(args.grid);
  const growth::ChartCurveSet chart =
      growth::reference_curves(table, growth::parse_sex(args.sex), levels, grid.ages());
  std::ostringstream ss;
  growth::write_chart_csv(ss, chart);
  atomic_write(args.out, ss.str());
  info("reference chart: " + std::to_string(chart.levels.size()) + " levels x " +
       std::to_string(chart.ages.size()) + " ages -> " + args.out);
  return 0;
}

struct CompareArgs {
  std::string a, b, out, text_out;
  std::vector<double> levels;
};

int run_compare(const CompareArgs& args) {
  std::ifstream ina(args.a, std::ios::binary);
  if (!ina) throw std::runtime_error("cannot open: " + args.a);
  std::ifstream inb(args.b, std::ios::binary);
  if (!inb) throw std::runtime_error("cannot open: " + args.b);
  const growth::ChartCurveSet a = growth::read_chart_csv(ina);
  const growth::ChartCurveSet b = growth::read_chart_csv(inb);
  const growth::ChartComparison cmp = growth::compare_charts(a, b, args.levels);
  const std::string text = cmp.to_text();
  atomic_write(args.out, cmp.to_json().dump(2) + "\n");
  if (!args.text_out.empty()) atomic_write(args.text_out, text);
  std::cout << text;
  return 0;
}

struct SynthArgs {
  std::string lms_weight, lms_stature, sex, out;
  std::size_t per_bin = 100;
  std::uint64_t seed = 20180601;
  double age_lo = 2.0, age_hi = 20.0;
};

int run_synth(const SynthArgs& args) {
  growth::CohortSpec spec;
  spec.weight_lms = load_lms_file(args.lms_weight, growth::Measure::weight);
  spec.stature_lms = load_lms_file(args.lms_stature, growth::Measure::stature);
  spec.sex = growth::parse_sex(args.sex);
  spec.per_bin = args.per_bin;
  spec.seed = args.seed;
  spec.age_lo = args.age_lo;
  spec.age_hi = args.age_hi;
  const std::vector<growth::Encounter> cohort = growth::sample_cohort(spec);
  std::ostringstream ss;
  growth::write_cohort_csv(ss, cohort);
  atomic_write(args.out, ss.str());
  info("cohort: " + std::to_string(cohort.size()) + " encounters -> " + args.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"growthchart: build, reference, and compare pediatric growth charts"};
  app.require_subcommand(1);

  BuildArgs build_args;
  CLI::App* build = app.add_subcommand(
      "build-chart", "Build percentile curves for one measure and sex from an encounter CSV");
  build->add_option("--input", build_args.input, "encounter CSV")->required();
  build->add_option("--measure", build_args.measure, "weight | stature | bmi")
      ->check(CLI::IsMember({"weight", "stature", "bmi"}));
  build->add_option("--sex", build_args.sex, "m | f")
      ->required()
      ->check(CLI::IsMember({"m", "f", "male", "female"}, CLI::ignore_case));
  build->add_option("--preset", build_args.preset, "edw | nhanes | generic")
      ->check(CLI::IsMember({"edw", "nhanes", "generic"}));
  build->add_option("--out", build_args.out, "chart CSV path")->required();
  build->add_option("--out-model", build_args.out_model,
                    "model JSON path (default: <out>.model.json)");
  build->add_option("--config", build_args.config_path, "TOML/JSON override file");
  build->add_option("--svg", build_args.svg_path, "also render an SVG chart");
  build->add_option("--emit-empirical", build_args.emit_empirical,
                    "write the empirical percentile points CSV");
  build->add_option("--emit-report", build_args.emit_report,
                    "write a JSON build report with row diagnostics");

  ReferenceArgs ref_args;
  CLI::App* reference =
      app.add_subcommand("reference", "Evaluate percentile curves from an LMS reference table");
  reference->add_option("--lms", ref_args.lms, "LMS CSV (Sex,Agemos|Age,L,M,S)")->required();
  reference->add_option("--sex", ref_args.sex, "m | f")
      ->required()
      ->check(CLI::IsMember({"m", "f", "male", "female"}, CLI::ignore_case));
  reference->add_option("--measure", ref_args.measure, "weight | stature | bmi")
      ->check(CLI::IsMember({"weight", "stature", "bmi"}));
  reference->add_option("--levels", ref_args.levels, "percentile levels (default chart set)")
      ->delimiter(',');
  reference->add_option("--grid", ref_args.grid, "age grid start:end:step (years)");
  reference->add_option("--out", ref_args.out, "chart CSV path")->required();

  CompareArgs cmp_args;
  CLI::App* compare = app.add_subcommand("compare", "Numeric divergence of two chart CSVs");
  compare->add_option("--a", cmp_args.a, "baseline chart CSV")->required();
  compare->add_option("--b", cmp_args.b, "comparison chart CSV")->required();
  compare->add_option("--levels", cmp_args.levels, "levels to compare (default 3,50,97)")
      ->delimiter(',');
  compare->add_option("--out", cmp_args.out, "JSON report path")->required();
  compare->add_option("--text", cmp_args.text_out, "also write the text report here");

  SynthArgs synth_args;
  CLI::App* synth =
      app.add_subcommand("synth", "Generate a synthetic encounter cohort from LMS tables");
  synth->add_option("--lms-weight", synth_args.lms_weight, "weight LMS CSV")->required();
  synth->add_option("--lms-stature", synth_args.lms_stature, "stature LMS CSV")->required();
  synth->add_option("--sex", synth_args.sex, "m | f")
      ->required()
      ->check(CLI::IsMember({"m", "f", "male", "female"}, CLI::ignore_case));
  synth->add_option("--per-bin", synth_args.per_bin, "samples per half-year bin")->required();
  synth->add_option("--seed", synth_args.seed, "RNG seed")->required();
  synth->add_option("--age-lo", synth_args.age_lo, "bin range start (default 2)");
  synth->add_option("--age-hi", synth_args.age_hi, "bin range end (default 20)");
  synth->add_option("--out", synth_args.out, "cohort CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*build) return run_build(build_args);
    if (*reference) return run_reference(ref_args);
    if (*compare) return run_compare(cmp_args);
    if (*synth) return run_synth(synth_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
