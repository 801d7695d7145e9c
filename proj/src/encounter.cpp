#include "growth/encounter.hpp"

#include <cmath>
#include <unordered_map>

#include "growth/csv.hpp"

namespace growth {

double Encounter::measure_value(Measure m) const {
  switch (m) {
    case Measure::weight: return weight_kg.value();
    case Measure::stature: return stature_cm.value();
    case Measure::bmi: return bmi.value();
  }
  throw std::logic_error("bad measure");
}

double derive_bmi(double weight_kg, double stature_cm) {
  if (!(weight_kg > 0.0) || !(stature_cm > 0.0))
    throw std::domain_error("derive_bmi: weight and stature must be positive");
  const double meters = stature_cm / 100.0;
  return weight_kg / (meters * meters);
}

Schema parse_schema(const std::string& text) {
  if (text == "edw") return Schema::edw;
  if (text == "nhanes") return Schema::nhanes;
  if (text == "generic") return Schema::generic;
  throw std::invalid_argument("unknown schema: \"" + text + "\" (expected edw, nhanes or generic)");
}

std::string to_string(Schema schema) {
  switch (schema) {
    case Schema::edw: return "edw";
    case Schema::nhanes: return "nhanes";
    case Schema::generic: return "generic";
  }
  return "?";
}

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::missing_field: return "missing_field";
    case RejectReason::weight_over_max: return "weight_over_max";
    case RejectReason::stature_over_max: return "stature_over_max";
    case RejectReason::bmi_out_of_range: return "bmi_out_of_range";
    case RejectReason::age_out_of_range: return "age_out_of_range";
    case RejectReason::too_few_encounters: return "too_few_encounters";
    case RejectReason::malformed_row: return "malformed_row";
  }
  return "?";
}

namespace {

struct ColumnSet {
  std::optional<std::size_t> subject, sex, age, age_months, weight, stature, bmi;
};

ColumnSet resolve_columns(const csv::Reader& reader, Schema schema) {
  ColumnSet cols;
  switch (schema) {
    case Schema::nhanes:
      cols.subject = reader.column({"seqn", "subject_id", "id"});
      cols.sex = reader.column({"riagendr", "sex"});
      cols.age = reader.column({"ridageyr", "age", "age_years"});
      cols.age_months = reader.column({"ridagemo", "age_months"});
      cols.weight = reader.column({"bmxwt", "weight", "weight_kg"});
      cols.stature = reader.column({"bmxht", "stature", "stature_cm", "height"});
      cols.bmi = reader.column({"bmxbmi", "bmi"});
      break;
    case Schema::edw:
      cols.subject = reader.column({"pat_id", "patient_id", "subject_id", "id"});
      cols.sex = reader.column({"sex", "gender"});
      cols.age = reader.column({"age", "age_years"});
      cols.age_months = reader.column({"age_months"});
      cols.weight = reader.column({"weight", "weight_kg", "wt"});
      cols.stature = reader.column({"stature", "stature_cm", "height", "height_cm", "ht"});
      cols.bmi = reader.column({"bmi"});
      break;
    case Schema::generic:
      cols.subject = reader.column({"subject_id", "id"});
      cols.sex = reader.column({"sex"});
      cols.age = reader.column({"age", "age_years"});
      cols.age_months = reader.column({"age_months"});
      cols.weight = reader.column({"weight", "weight_kg"});
      cols.stature = reader.column({"stature", "stature_cm", "height"});
      cols.bmi = reader.column({"bmi"});
      break;
  }
  if (!cols.subject) throw std::runtime_error("missing required column: subject_id");
  if (!cols.sex) throw std::runtime_error("missing required column: sex");
  if (!cols.age && !cols.age_months)
    throw std::runtime_error("missing required column: age (or age_months)");
  return cols;
}

std::optional<std::string> field_at(const std::vector<std::string>& fields,
                                    std::optional<std::size_t> idx) {
  if (!idx || *idx >= fields.size()) return std::nullopt;
  return fields[*idx];
}

}  // namespace

ParseResult parse_encounters(std::istream& in, Schema schema) {
  csv::Reader reader(in);
  const ColumnSet cols = resolve_columns(reader, schema);

  ParseResult result;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    ++result.total_rows;
    const std::size_t line = reader.line_number();
    auto reject = [&](const std::string& msg) {
      ++result.malformed_rows;
      result.diagnostics.push_back({line, msg, true});
    };

    const auto subject = field_at(fields, cols.subject);
    if (!subject || csv::is_missing(*subject)) {
      reject("missing subject id");
      continue;
    }

    const auto sex_field = field_at(fields, cols.sex);
    if (!sex_field || csv::is_missing(*sex_field)) {
      reject("missing sex");
      continue;
    }
    Sex sex;
    try {
      sex = parse_sex(*sex_field);
    } catch (const std::invalid_argument& e) {
      reject(e.what());
      continue;
    }

    // Age in decimal years, or exact months/12 from an age_months column.
    double age = 0.0;
    const auto age_field = field_at(fields, cols.age);
    if (age_field && !csv::is_missing(*age_field)) {
      const auto v = csv::parse_double(*age_field);
      if (!v) {
        reject("unparseable age: \"" + *age_field + "\"");
        continue;
      }
      age = *v;
    } else {
      const auto months_field = field_at(fields, cols.age_months);
      if (!months_field || csv::is_missing(*months_field)) {
        reject("missing age");
        continue;
      }
      const auto v = csv::parse_double(*months_field);
      if (!v) {
        reject("unparseable age_months: \"" + *months_field + "\"");
        continue;
      }
      age = *v / 12.0;
    }
    if (!std::isfinite(age) || age < 0.0) {
      reject("age out of domain (must be finite and >= 0)");
      continue;
    }

    auto numeric = [&](std::optional<std::size_t> idx, const char* name,
                       std::optional<double>& out) -> bool {
      const auto f = field_at(fields, idx);
      if (!f || csv::is_missing(*f)) {
        out = std::nullopt;
        return true;
      }
      const auto v = csv::parse_double(*f);
      if (!v || !std::isfinite(*v)) {
        reject(std::string("unparseable ") + name + ": \"" + *f + "\"");
        return false;
      }
      out = *v;
      return true;
    };

    Encounter e;
    e.subject_id = *subject;
    e.sex = sex;
    e.age_years = age;
    if (!numeric(cols.weight, "weight", e.weight_kg)) continue;
    if (!numeric(cols.stature, "stature", e.stature_cm)) continue;
    if (!numeric(cols.bmi, "bmi", e.bmi)) continue;

    if (e.weight_kg && e.stature_cm && *e.weight_kg > 0.0 && *e.stature_cm > 0.0) {
      const double derived = derive_bmi(*e.weight_kg, *e.stature_cm);
      if (!e.bmi) {
        e.bmi = derived;
      } else if (std::fabs(*e.bmi - derived) > 0.05) {
        result.diagnostics.push_back(
            {line,
             "supplied bmi " + csv::format_sig(*e.bmi, 6) + " differs from derived " +
                 csv::format_sig(derived, 6) + " by more than 0.05 kg/m^2; keeping supplied value",
             false});
      }
    }

    result.encounters.push_back(std::move(e));
  }
  return result;
}

void ExclusionPolicy::validate() const {
  auto positive = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0))
      throw std::invalid_argument(std::string("exclusion policy: ") + name + " must be positive");
  };
  positive(max_weight_kg, "max_weight_kg");
  positive(max_stature_cm, "max_stature_cm");
  positive(bmi_min, "bmi_min");
  positive(bmi_max, "bmi_max");
  if (bmi_min && bmi_max && !(*bmi_min < *bmi_max))
    throw std::invalid_argument("exclusion policy: bmi_min must be < bmi_max");
}

ExclusionPolicy ExclusionPolicy::edw() {
  ExclusionPolicy p;
  p.max_weight_kg = 200.0;
  p.max_stature_cm = 242.0;
  p.bmi_min = 6.0;
  p.bmi_max = 100.0;
  p.min_age_years = 2.0;
  p.min_encounters_per_subject = 5;
  return p;
}

ExclusionPolicy ExclusionPolicy::nhanes() {
  ExclusionPolicy p;
  p.max_weight_kg = 300.0;
  p.bmi_max = 100.0;
  p.min_age_years = 0.0;
  p.max_age_years = 26.0;
  return p;
}

ExclusionPolicy ExclusionPolicy::none() { return ExclusionPolicy{}; }

std::size_t ExclusionReport::rejected_total() const {
  std::size_t sum = 0;
  for (auto c : rejected) sum += c;
  return sum;
}

nlohmann::json ExclusionReport::to_json() const {
  nlohmann::json rej;
  for (std::size_t i = 0; i < kRejectReasonCount; ++i)
    rej[to_string(static_cast<RejectReason>(i))] = rejected[i];
  return nlohmann::json{{"total_rows", total_rows}, {"accepted", accepted}, {"rejected", rej}};
}

std::pair<std::vector<Encounter>, ExclusionReport> apply_exclusions(
    std::span<const Encounter> encounters, const ExclusionPolicy& policy) {
  policy.validate();
  ExclusionReport report;
  report.total_rows = encounters.size();
  auto tally = [&](RejectReason r) { ++report.rejected[static_cast<std::size_t>(r)]; };

  std::vector<Encounter> survivors;
  survivors.reserve(encounters.size());
  for (const Encounter& e : encounters) {
    if (!e.weight_kg || !e.stature_cm || !e.bmi) {
      tally(RejectReason::missing_field);
    } else if (policy.max_weight_kg && *e.weight_kg > *policy.max_weight_kg) {
      tally(RejectReason::weight_over_max);
    } else if (policy.max_stature_cm && *e.stature_cm > *policy.max_stature_cm) {
      tally(RejectReason::stature_over_max);
    } else if ((policy.bmi_min && *e.bmi < *policy.bmi_min) ||
               (policy.bmi_max && *e.bmi > *policy.bmi_max)) {
      tally(RejectReason::bmi_out_of_range);
    } else if ((policy.min_age_years && e.age_years < *policy.min_age_years) ||
               (policy.max_age_years && e.age_years > *policy.max_age_years)) {
      tally(RejectReason::age_out_of_range);
    } else {
      survivors.push_back(e);
    }
  }

  if (policy.min_encounters_per_subject && *policy.min_encounters_per_subject > 1) {
    std::unordered_map<std::string, std::size_t> per_subject;
    for (const Encounter& e : survivors) ++per_subject[e.subject_id];
    std::vector<Encounter> kept;
    kept.reserve(survivors.size());
    for (Encounter& e : survivors) {
      if (per_subject[e.subject_id] >= *policy.min_encounters_per_subject) {
        kept.push_back(std::move(e));
      } else {
        tally(RejectReason::too_few_encounters);
      }
    }
    survivors = std::move(kept);
  }

  report.accepted = survivors.size();
  return {std::move(survivors), report};
}

IngestResult run_ingest(std::istream& in, Schema schema, const ExclusionPolicy& policy) {
  ParseResult parsed = parse_encounters(in, schema);
  auto [clean, report] = apply_exclusions(parsed.encounters, policy);
  report.rejected[static_cast<std::size_t>(RejectReason::malformed_row)] = parsed.malformed_rows;
  report.total_rows = parsed.total_rows;
  return {std::move(clean), report, std::move(parsed.diagnostics)};
}

}  // namespace growth
