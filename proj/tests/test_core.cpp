#include "aircep/core.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace aircep;

TEST_CASE("pollutant names round-trip through the parser") {
  for (Pollutant p : kAllPollutants) {
    CHECK(parse_pollutant(pollutant_name(p)) == p);
    CHECK(parse_pollutant(ascii_upper(pollutant_lower(p))) == p);
  }
  CHECK(parse_pollutant("pm25") == Pollutant::PM25);
  CHECK(parse_pollutant("so2") == Pollutant::SO2);
  CHECK_FALSE(parse_pollutant("PM1").has_value());
  CHECK_FALSE(parse_pollutant("").has_value());
}

TEST_CASE("category names round-trip and aliases resolve") {
  for (Category c : kAllCategories) CHECK(parse_category(category_name(c)) == c);
  CHECK(parse_category("Moderate") == Category::ModeratelyPolluted);
  CHECK(parse_category("Moderately Polluted") == Category::ModeratelyPolluted);
  CHECK(parse_category("very poor") == Category::VeryPoor);
  CHECK(parse_category("SEVERE") == Category::Severe);
  CHECK_FALSE(parse_category("Hazardous").has_value());
}

TEST_CASE("category ranges tile 0..500 without gaps") {
  int expect_lo = 0;
  for (Category c : kAllCategories) {
    auto [lo, hi] = category_range(c);
    CHECK(lo == expect_lo);
    CHECK(hi >= lo);
    expect_lo = hi + 1;
  }
  CHECK(expect_lo == 501);
}

TEST_CASE("timestamps convert to and from civil dates") {
  CHECK(make_timestamp(1970, 1, 1).secs == 0);
  CHECK(make_timestamp(1970, 1, 2).secs == 86400);
  CHECK(make_timestamp(2015, 1, 1).secs == 1420070400);
  CHECK(make_timestamp(2020, 3, 1).secs - make_timestamp(2020, 2, 28).secs == 2 * 86400);

  CHECK(parse_timestamp("2015-01-01") == make_timestamp(2015, 1, 1));
  CHECK(parse_timestamp("2015-01-01 06:30:00") == make_timestamp(2015, 1, 1, 6, 30));
  CHECK(parse_timestamp("2015-01-01T06:30:15") == make_timestamp(2015, 1, 1, 6, 30, 15));
  CHECK_FALSE(parse_timestamp("2015-13-01").has_value());
  CHECK_FALSE(parse_timestamp("2015/01/01").has_value());
  CHECK_FALSE(parse_timestamp("yesterday").has_value());

  CHECK(format_iso8601(make_timestamp(2015, 1, 1)) == "2015-01-01T00:00:00");
  CHECK(format_iso8601(make_timestamp(1999, 12, 31, 23, 59, 59)) == "1999-12-31T23:59:59");
}

TEST_CASE("timestamp formatting round-trips across four centuries") {
  for (std::int64_t secs = -4'000'000'000; secs <= 8'000'000'000; secs += 86400 * 37 + 5411) {
    Timestamp t{secs};
    auto back = parse_timestamp(format_iso8601(t));
    REQUIRE(back.has_value());
    CHECK(back->secs == secs);
  }
}

TEST_CASE("format_double emits shortest round-trip forms") {
  CHECK(format_double(0) == "0");
  CHECK(format_double(2.5) == "2.5");
  CHECK(format_double(55.5) == "55.5");
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("parse_double and parse_int reject trailing garbage") {
  CHECK(parse_double("55.5") == 55.5);
  CHECK(parse_double("-3") == -3.0);
  CHECK(parse_double("1e3") == 1000.0);
  CHECK_FALSE(parse_double("55.5x").has_value());
  CHECK_FALSE(parse_double("").has_value());
  CHECK_FALSE(parse_double("nanometer").has_value());
  CHECK(parse_int("42") == 42);
  CHECK(parse_int("-7") == -7);
  CHECK_FALSE(parse_int("42.5").has_value());
  CHECK_FALSE(parse_int("4 2").has_value());
}

TEST_CASE("trim strips ascii whitespace only at the edges") {
  CHECK(trim("  a b  ") == "a b");
  CHECK(trim("\t\r\n x \t") == "x");
  CHECK(trim("") == "");
  CHECK(trim("   ") == "");
}
