#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "growth/encounter.hpp"

using namespace growth;

namespace {

ParseResult parse(const std::string& text, Schema schema = Schema::generic) {
  std::istringstream in(text);
  return parse_encounters(in, schema);
}

std::string test_data_dir() {
  const char* p = std::getenv("GROWTH_TEST_DATA");
  REQUIRE_MESSAGE(p != nullptr, "GROWTH_TEST_DATA must point at tests/data");
  return p;
}

}  // namespace

TEST_SUITE("encounter") {
  TEST_CASE("derive_bmi") {
    CHECK(derive_bmi(50.0, 200.0) == doctest::Approx(12.5).epsilon(1e-12));
    CHECK(derive_bmi(100.0, 100.0) == doctest::Approx(100.0).epsilon(1e-12));
    // inverse arithmetic: weight built from a target bmi comes back out
    const double w = 63.1 * 1.5 * 1.5;
    CHECK(derive_bmi(w, 150.0) == doctest::Approx(63.1).epsilon(1e-12));
    CHECK_THROWS_AS(derive_bmi(0.0, 100.0), std::domain_error);
    CHECK_THROWS_AS(derive_bmi(50.0, -1.0), std::domain_error);
  }

  TEST_CASE("derive_bmi round-trips against weight") {
    for (double w : {3.5, 20.0, 75.0, 180.0}) {
      for (double h : {55.0, 100.0, 150.0, 200.0}) {
        const double bmi = derive_bmi(w, h);
        CHECK(bmi * (h / 100.0) * (h / 100.0) == doctest::Approx(w).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("generic schema row maps directly, bmi derived") {
    const auto res = parse("subject_id,sex,age,weight,stature\nS1,M,5.2,19.0,110.0\n");
    REQUIRE(res.encounters.size() == 1);
    const Encounter& e = res.encounters[0];
    CHECK(e.subject_id == "S1");
    CHECK(e.sex == Sex::male);
    CHECK(e.age_years == 5.2);
    CHECK(e.weight_kg == 19.0);
    CHECK(e.stature_cm == 110.0);
    REQUIRE(e.bmi.has_value());
    CHECK(*e.bmi == doctest::Approx(19.0 / 1.21).epsilon(1e-12));
    CHECK(res.diagnostics.empty());
    CHECK(res.malformed_rows == 0);
    CHECK(res.total_rows == 1);
  }

  TEST_CASE("unknown sex code becomes a diagnostic, not an encounter") {
    const auto res = parse("subject_id,sex,age,weight,stature\nS1,X,5.2,19.0,110.0\n");
    CHECK(res.encounters.empty());
    REQUIRE(res.malformed_rows == 1);
    REQUIRE(res.diagnostics.size() == 1);
    CHECK(res.diagnostics[0].line == 2);
    CHECK(res.diagnostics[0].fatal_for_row);
  }

  TEST_CASE("header-only file parses to nothing") {
    const auto res = parse("subject_id,sex,age,weight,stature\n");
    CHECK(res.encounters.empty());
    CHECK(res.diagnostics.empty());
    CHECK(res.total_rows == 0);
  }

  TEST_CASE("missing required header column is fatal") {
    std::istringstream in("subject_id,age,weight\nS1,5,20\n");
    CHECK_THROWS_WITH_AS(parse_encounters(in, Schema::generic),
                         doctest::Contains("sex"), std::runtime_error);
  }

  TEST_CASE("unparseable numbers are diagnosed with line numbers") {
    const auto res = parse(
        "subject_id,sex,age,weight,stature\n"
        "S1,M,abc,19.0,110.0\n"
        "S2,F,6.0,20.5,112.0\n");
    REQUIRE(res.encounters.size() == 1);
    CHECK(res.encounters[0].subject_id == "S2");
    REQUIRE(res.diagnostics.size() == 1);
    CHECK(res.diagnostics[0].line == 2);
  }

  TEST_CASE("age_months column converts as months over twelve") {
    const auto res = parse("subject_id,sex,age_months,weight,stature\nS1,F,30,13.0,90.0\n");
    REQUIRE(res.encounters.size() == 1);
    CHECK(res.encounters[0].age_years == doctest::Approx(2.5).epsilon(1e-15));
  }

  TEST_CASE("supplied bmi wins and large disagreement warns") {
    const auto res = parse(
        "subject_id,sex,age,weight,stature,bmi\n"
        "S1,M,5.0,19.0,110.0,15.70\n"   // derived 15.7025, within 0.05
        "S2,M,6.0,20.0,110.0,17.00\n");  // derived 16.528, off by ~0.47
    REQUIRE(res.encounters.size() == 2);
    CHECK(*res.encounters[0].bmi == 15.70);
    CHECK(*res.encounters[1].bmi == 17.00);
    REQUIRE(res.diagnostics.size() == 1);
    CHECK(res.diagnostics[0].line == 3);
    CHECK_FALSE(res.diagnostics[0].fatal_for_row);  // warning, row kept
  }

  TEST_CASE("nhanes schema columns and numeric sex codes") {
    const auto res = parse(
        "SEQN,RIAGENDR,RIDAGEYR,BMXWT,BMXHT,BMXBMI\n"
        "1001,1,10.1,32.0,140.0,16.33\n"
        "1002,2,11.3,36.5,145.0,17.36\n",
        Schema::nhanes);
    REQUIRE(res.encounters.size() == 2);
    CHECK(res.encounters[0].sex == Sex::male);
    CHECK(res.encounters[1].sex == Sex::female);
    CHECK(res.encounters[0].subject_id == "1001");
  }

  TEST_CASE("edw schema accepts pat_id") {
    const auto res = parse("pat_id,sex,age,weight,stature\nP9,f,4.5,17.0,104.0\n", Schema::edw);
    REQUIRE(res.encounters.size() == 1);
    CHECK(res.encounters[0].sex == Sex::female);
  }

  TEST_CASE("policy validation") {
    ExclusionPolicy p;
    p.max_weight_kg = -5.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ExclusionPolicy{};
    p.bmi_min = 10.0;
    p.bmi_max = 6.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    CHECK_NOTHROW(ExclusionPolicy::edw().validate());
    CHECK_NOTHROW(ExclusionPolicy::nhanes().validate());
    CHECK_NOTHROW(ExclusionPolicy::none().validate());
  }

  TEST_CASE("edw thresholds: weight, bmi, encounter-count rejections") {
    std::vector<Encounter> encs;
    auto add = [&](std::string id, double age, double w, double st) {
      Encounter e;
      e.subject_id = std::move(id);
      e.sex = Sex::male;
      e.age_years = age;
      e.weight_kg = w;
      e.stature_cm = st;
      e.bmi = derive_bmi(w, st);
      encs.push_back(e);
    };
    for (int i = 0; i < 5; ++i) add("keep", 4.0 + i, 17.0 + i, 104.0 + 2 * i);
    add("w", 9.0, 210.0, 133.0);        // weight_over_max
    add("b", 11.0, 12.375, 150.0);      // bmi 5.5 -> bmi_out_of_range
    for (int i = 0; i < 4; ++i) add("few", 5.0 + i, 18.0 + i, 108.0 + 2 * i);

    const auto [kept, report] = apply_exclusions(encs, ExclusionPolicy::edw());
    CHECK(kept.size() == 5);
    CHECK(report.accepted == 5);
    CHECK(report.count(RejectReason::weight_over_max) == 1);
    CHECK(report.count(RejectReason::bmi_out_of_range) == 1);
    CHECK(report.count(RejectReason::too_few_encounters) == 4);
    CHECK(report.accepted + report.rejected_total() == report.total_rows);
  }

  TEST_CASE("rejection precedence: weight wins over stature and bmi") {
    Encounter e;
    e.subject_id = "x";
    e.sex = Sex::male;
    e.age_years = 9.0;
    e.weight_kg = 210.0;   // over 200
    e.stature_cm = 250.0;  // also over 242
    e.bmi = derive_bmi(210.0, 250.0);
    ExclusionPolicy p = ExclusionPolicy::edw();
    p.min_encounters_per_subject.reset();
    const auto [kept, report] = apply_exclusions(std::vector<Encounter>{e}, p);
    CHECK(kept.empty());
    CHECK(report.count(RejectReason::weight_over_max) == 1);
    CHECK(report.count(RejectReason::stature_over_max) == 0);
  }

  TEST_CASE("min_encounters counts survivors of the value filters") {
    std::vector<Encounter> encs;
    auto add = [&](double age, double w) {
      Encounter e;
      e.subject_id = "s";
      e.sex = Sex::male;
      e.age_years = age;
      e.weight_kg = w;
      e.stature_cm = 110.0;
      e.bmi = derive_bmi(w, 110.0);
      encs.push_back(e);
    };
    // five rows, but one fails the weight filter, leaving four -> all too few
    for (int i = 0; i < 4; ++i) add(5.0 + i, 19.0 + i);
    add(9.0, 210.0);
    const auto [kept, report] = apply_exclusions(encs, ExclusionPolicy::edw());
    CHECK(kept.empty());
    CHECK(report.count(RejectReason::weight_over_max) == 1);
    CHECK(report.count(RejectReason::too_few_encounters) == 4);
  }

  TEST_CASE("disabled policy is identity and idempotent") {
    std::vector<Encounter> encs;
    Encounter e;
    e.subject_id = "solo";
    e.sex = Sex::female;
    e.age_years = 3.0;
    e.weight_kg = 14.0;
    e.stature_cm = 95.0;
    e.bmi = derive_bmi(14.0, 95.0);
    encs.push_back(e);
    const auto [kept, report] = apply_exclusions(encs, ExclusionPolicy::none());
    CHECK(kept.size() == 1);
    CHECK(report.rejected_total() == 0);
    const auto [kept2, report2] = apply_exclusions(kept, ExclusionPolicy::none());
    CHECK(kept2.size() == 1);
    CHECK(report2.rejected_total() == 0);
  }

  TEST_CASE("run_ingest on the crafted fixture tallies every reason") {
    std::ifstream in(test_data_dir() + "/exclusion_fixture.csv");
    REQUIRE(in.good());
    const IngestResult res = run_ingest(in, Schema::edw, ExclusionPolicy::edw());
    CHECK(res.report.total_rows == 20);
    CHECK(res.report.accepted == 9);
    CHECK(res.encounters.size() == 9);
    CHECK(res.report.count(RejectReason::malformed_row) == 1);
    CHECK(res.report.count(RejectReason::missing_field) == 1);
    CHECK(res.report.count(RejectReason::weight_over_max) == 1);
    CHECK(res.report.count(RejectReason::stature_over_max) == 1);
    CHECK(res.report.count(RejectReason::bmi_out_of_range) == 2);
    CHECK(res.report.count(RejectReason::age_out_of_range) == 1);
    CHECK(res.report.count(RejectReason::too_few_encounters) == 4);
    CHECK(res.report.accepted + res.report.rejected_total() == 20);
    for (const Encounter& e : res.encounters) CHECK(e.subject_id == "A");
  }

  TEST_CASE("exclusion report serializes to json") {
    ExclusionReport r;
    r.accepted = 3;
    r.total_rows = 5;
    r.rejected[static_cast<std::size_t>(RejectReason::weight_over_max)] = 2;
    const nlohmann::json j = r.to_json();
    CHECK(j["accepted"] == 3);
    CHECK(j["total_rows"] == 5);
    CHECK(j["rejected"]["weight_over_max"] == 2);
  }
}
