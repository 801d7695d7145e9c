#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "growth/encounter.hpp"
#include "growth/lms.hpp"
#include "growth/types.hpp"

namespace growth {

/// Recipe for a synthetic cross-sectional cohort with a known ground truth.
struct CohortSpec {
  LmsTable weight_lms;
  LmsTable stature_lms;
  Sex sex = Sex::male;
  double age_lo = 2.0;   // bin grid start (inclusive)
  double age_hi = 20.0;  // bin grid end (exclusive), half-year bins
  std::size_t per_bin = 100;
  std::uint64_t seed = 20180601;
};

/// Draws per_bin subjects in every half-year bin of [age_lo, age_hi): age
/// uniform in the bin, then weight and stature from their LMS distributions
/// at that age via independent standard-normal draws. One encounter per
/// subject, ids "S000001"... in generation order. Deterministic for a fixed
/// spec: a seeded 64-bit Mersenne Twister feeds uniforms u = (x >> 11 + 1/2)
/// / 2^53 in (0, 1), mapped through the normal quantile; per subject the
/// draw order is age, weight z, stature z. Throws std::domain_error when
/// the age range leaves either table's coverage.
std::vector<Encounter> sample_cohort(const CohortSpec& spec);

/// Writes the cohort as an encounter CSV in the `generic` schema
/// (subject_id,sex,age,weight_kg,stature_cm,bmi), values round-tripping
/// exactly.
void write_cohort_csv(std::ostream& out, const std::vector<Encounter>& cohort);

}  // namespace growth
