#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "growth/types.hpp"

namespace growth {

/// One measurement event. Raw rows may lack weight/stature/bmi; after
/// apply_exclusions every retained encounter has all three present.
struct Encounter {
  std::string subject_id;
  Sex sex = Sex::male;
  double age_years = 0.0;
  std::optional<double> weight_kg;
  std::optional<double> stature_cm;
  std::optional<double> bmi;

  double measure_value(Measure m) const;
};

/// weight / (stature/100)^2. Throws std::domain_error on non-positive input.
double derive_bmi(double weight_kg, double stature_cm);

/// Input column dialect. Differences are column names and sex coding only.
enum class Schema { edw, nhanes, generic };

Schema parse_schema(const std::string& text);
std::string to_string(Schema schema);

struct RowDiagnostic {
  std::size_t line = 0;
  std::string message;
  bool fatal_for_row = true;  // false for advisory warnings (kept the row)
};

struct ParseResult {
  std::vector<Encounter> encounters;
  std::vector<RowDiagnostic> diagnostics;  // malformed rows + warnings
  std::size_t malformed_rows = 0;
  std::size_t total_rows = 0;  // data rows seen (well-formed + malformed)
};

/// Parses an encounter CSV. Requires a header naming subject id, sex and
/// age (or age in months). Malformed rows become diagnostics with line
/// numbers; they are never silently dropped. BMI is derived from weight and
/// stature when absent; a supplied BMI wins, with a consistency warning
/// when it disagrees with the derived value by more than 0.05 kg/m^2.
/// Throws std::runtime_error on an unreadable stream or a missing required
/// header column.
ParseResult parse_encounters(std::istream& in, Schema schema);

enum class RejectReason {
  missing_field,
  weight_over_max,
  stature_over_max,
  bmi_out_of_range,
  age_out_of_range,
  too_few_encounters,
  malformed_row,
};
constexpr std::size_t kRejectReasonCount = 7;

const char* to_string(RejectReason reason);

/// Value thresholds; unset members disable the corresponding check.
struct ExclusionPolicy {
  std::optional<double> max_weight_kg;
  std::optional<double> max_stature_cm;
  std::optional<double> bmi_min;
  std::optional<double> bmi_max;
  std::optional<double> min_age_years;
  std::optional<double> max_age_years;
  std::optional<std::size_t> min_encounters_per_subject;

  /// Throws std::invalid_argument on non-positive thresholds or
  /// bmi_min >= bmi_max.
  void validate() const;

  static ExclusionPolicy edw();     // max weight 200, stature 242, bmi 6-100, age >= 2, >= 5 encounters
  static ExclusionPolicy nhanes();  // max weight 300, bmi <= 100, age 0-26
  static ExclusionPolicy none();    // identity
};

struct ExclusionReport {
  std::array<std::size_t, kRejectReasonCount> rejected{};  // indexed by RejectReason
  std::size_t accepted = 0;
  std::size_t total_rows = 0;

  std::size_t count(RejectReason reason) const { return rejected[static_cast<std::size_t>(reason)]; }
  std::size_t rejected_total() const;
  nlohmann::json to_json() const;
};

/// Applies the policy. Rejections are tallied by the first matching reason
/// in the order missing -> weight -> stature -> bmi -> age; the
/// per-subject encounter minimum is counted after those value filters.
/// Input order is preserved for retained encounters.
std::pair<std::vector<Encounter>, ExclusionReport> apply_exclusions(
    std::span<const Encounter> encounters, const ExclusionPolicy& policy);

struct IngestResult {
  std::vector<Encounter> encounters;
  ExclusionReport report;  // includes malformed rows; totals cover all parsed rows
  std::vector<RowDiagnostic> diagnostics;
};

/// parse_encounters + apply_exclusions with malformed rows folded into the
/// report so accepted + rejected == total rows seen.
IngestResult run_ingest(std::istream& in, Schema schema, const ExclusionPolicy& policy);

}  // namespace growth
