#include "growth/synth.hpp"

#include <cstdio>
#include <random>
#include <stdexcept>

#include "growth/binning.hpp"
#include "growth/csv.hpp"

namespace growth {

namespace {

// (x >> 11 + 1/2) / 2^53: strictly inside (0, 1) so the normal quantile is
// always finite.
double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::vector<Encounter> sample_cohort(const CohortSpec& spec) {
  const std::vector<AgeBin> grid = make_age_grid(spec.age_lo, spec.age_hi, 0.5);

  for (const LmsTable* table : {&spec.weight_lms, &spec.stature_lms}) {
    const auto [lo, hi] = table->coverage(spec.sex);
    if (spec.age_lo < lo - 1e-12 || spec.age_hi > hi + 1e-12)
      throw std::domain_error("sample_cohort: age range [" + csv::format_sig(spec.age_lo, 10) +
                              ", " + csv::format_sig(spec.age_hi, 10) + "] outside " +
                              to_string(table->measure()) + " table coverage [" +
                              csv::format_sig(lo, 10) + ", " + csv::format_sig(hi, 10) + "]");
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<Encounter> cohort;
  cohort.reserve(grid.size() * spec.per_bin);
  std::size_t next_id = 1;
  char id_buf[16];
  for (const AgeBin& bin : grid) {
    for (std::size_t i = 0; i < spec.per_bin; ++i) {
      const double age = bin.lower + uniform01(rng) * (bin.upper - bin.lower);
      const double zw = z_of_probability(uniform01(rng));
      const double zs = z_of_probability(uniform01(rng));

      Encounter e;
      std::snprintf(id_buf, sizeof(id_buf), "S%06zu", next_id++);
      e.subject_id = id_buf;
      e.sex = spec.sex;
      e.age_years = age;
      e.weight_kg = lms_to_value(spec.weight_lms.interpolate(spec.sex, age), zw);
      e.stature_cm = lms_to_value(spec.stature_lms.interpolate(spec.sex, age), zs);
      e.bmi = derive_bmi(*e.weight_kg, *e.stature_cm);
      cohort.push_back(std::move(e));
    }
  }
  return cohort;
}

void write_cohort_csv(std::ostream& out, const std::vector<Encounter>& cohort) {
  out << "subject_id,sex,age,weight_kg,stature_cm,bmi\n";
  for (const Encounter& e : cohort) {
    out << e.subject_id << ',' << (e.sex == Sex::male ? 'M' : 'F') << ','
        << csv::format_full(e.age_years) << ','
        << (e.weight_kg ? csv::format_full(*e.weight_kg) : "") << ','
        << (e.stature_cm ? csv::format_full(*e.stature_cm) : "") << ','
        << (e.bmi ? csv::format_full(*e.bmi) : "") << '\n';
  }
}

}  // namespace growth
