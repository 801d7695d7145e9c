#include <doctest.h>

#include <sstream>

#include "growth/csv.hpp"

using namespace growth;

TEST_SUITE("csv") {
  TEST_CASE("split_record handles plain and quoted fields") {
    CHECK(csv::split_record("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(csv::split_record("a,,c") == std::vector<std::string>{"a", "", "c"});
    CHECK(csv::split_record("") == std::vector<std::string>{""});
    CHECK(csv::split_record("\"x,y\",z") == std::vector<std::string>{"x,y", "z"});
    CHECK(csv::split_record("\"he said \"\"hi\"\"\",2") ==
          std::vector<std::string>{"he said \"hi\"", "2"});
    CHECK(csv::split_record("a,b,") == std::vector<std::string>{"a", "b", ""});
  }

  TEST_CASE("reader maps headers case-insensitively and tracks line numbers") {
    std::istringstream in("Subject_ID, Sex ,AGE\nr1,M,5\n\nr2,F,6\n");
    csv::Reader reader(in);
    const auto id = reader.column({"subject_id"});
    const auto sex = reader.column({"sex"});
    const auto age = reader.column({"age_years", "age"});
    REQUIRE(id.has_value());
    REQUIRE(sex.has_value());
    REQUIRE(age.has_value());
    CHECK(*id == 0);
    CHECK(*sex == 1);
    CHECK(*age == 2);
    CHECK_FALSE(reader.column({"weight"}).has_value());

    std::vector<std::string> fields;
    REQUIRE(reader.next(fields));
    CHECK(fields[0] == "r1");
    CHECK(reader.line_number() == 2);
    REQUIRE(reader.next(fields));  // blank line skipped
    CHECK(fields[0] == "r2");
    CHECK(reader.line_number() == 4);
    CHECK_FALSE(reader.next(fields));
  }

  TEST_CASE("reader rejects empty input") {
    std::istringstream in("");
    CHECK_THROWS_AS(csv::Reader{in}, std::runtime_error);
  }

  TEST_CASE("is_missing") {
    CHECK(csv::is_missing(""));
    CHECK(csv::is_missing("  "));
    CHECK(csv::is_missing("NA"));
    CHECK(csv::is_missing("NaN"));
    CHECK(csv::is_missing("."));
    CHECK(csv::is_missing("null"));
    CHECK_FALSE(csv::is_missing("0"));
    CHECK_FALSE(csv::is_missing("n/a-ish"));
  }

  TEST_CASE("parse_double is strict about trailing junk") {
    CHECK(csv::parse_double("12.5") == 12.5);
    CHECK(csv::parse_double(" 12.5 ") == 12.5);
    CHECK(csv::parse_double("1e3") == 1000.0);
    CHECK(csv::parse_double("-4") == -4.0);
    CHECK_FALSE(csv::parse_double("12x").has_value());
    CHECK_FALSE(csv::parse_double("").has_value());
    CHECK_FALSE(csv::parse_double("one").has_value());
    CHECK_FALSE(csv::parse_double("1.2.3").has_value());
  }

  TEST_CASE("format_sig and format_full") {
    CHECK(csv::format_sig(123.456789, 6) == "123.457");
    CHECK(csv::format_sig(0.5, 6) == "0.5");
    const double tricky = 0.1 + 0.2;
    const std::string full = csv::format_full(tricky);
    CHECK(std::stod(full) == tricky);  // round-trips exactly
  }
}
