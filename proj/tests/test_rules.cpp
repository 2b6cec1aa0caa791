#include "aircep/rules.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "aircep/synth.hpp"

using namespace aircep;

TEST_CASE("parses a full rule with every comparator") {
  RuleSet rs = parse_rules(
      "RULE alpha WHEN PM25 >= 10 AND PM10 > 20 AND O3 <= 30 AND NO2 < 40 "
      "THEN CATEGORY Poor SEVERITY 3\n");
  REQUIRE(rs.rules.size() == 1);
  const Rule& r = rs.rules[0];
  CHECK(r.name == "alpha");
  REQUIRE(r.conditions.size() == 4);
  CHECK(r.conditions[0] == Condition{Pollutant::PM25, Comparator::Ge, 10});
  CHECK(r.conditions[1] == Condition{Pollutant::PM10, Comparator::Gt, 20});
  CHECK(r.conditions[2] == Condition{Pollutant::O3, Comparator::Le, 30});
  CHECK(r.conditions[3] == Condition{Pollutant::NO2, Comparator::Lt, 40});
  CHECK(r.category == Category::Poor);
  CHECK(r.severity == 3);
}

TEST_CASE("keywords are case-insensitive and comments are skipped") {
  RuleSet rs = parse_rules(
      "# leading comment\n"
      "rule beta when pm25 >= 5 then category good  # trailing\n"
      "RULE Gamma WHEN SO2 < 1 THEN CATEGORY severe\n");
  REQUIRE(rs.rules.size() == 2);
  CHECK(rs.rules[0].name == "beta");
  CHECK(rs.rules[0].category == Category::Good);
  CHECK_FALSE(rs.rules[0].severity.has_value());
  CHECK(rs.rules[1].name == "Gamma");
}

TEST_CASE("category aliases parse inside the DSL") {
  RuleSet rs = parse_rules("RULE a WHEN PM25 >= 5 THEN CATEGORY Moderate\n");
  CHECK(rs.rules[0].category == Category::ModeratelyPolluted);
}

TEST_CASE("parse errors carry line and column") {
  auto expect_error = [](std::string_view text, std::size_t line, std::string_view fragment) {
    try {
      parse_rules(text);
      FAIL("expected ParseError for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.line == line);
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  expect_error("WHEN PM25 >= 5", 1, "expected RULE");
  expect_error("RULE a PM25 >= 5", 1, "expected WHEN");
  expect_error("RULE a WHEN XYZ >= 5 THEN CATEGORY Good", 1, "expected pollutant");
  expect_error("RULE a WHEN PM25 5 THEN CATEGORY Good", 1, "expected comparator");
  expect_error("RULE a WHEN PM25 >= x THEN CATEGORY Good", 1, "expected threshold");
  expect_error("RULE a WHEN PM25 >= -5 THEN CATEGORY Good", 1, "finite and >= 0");
  expect_error("RULE a WHEN PM25 >= 5 CATEGORY Good", 1, "expected AND or THEN");
  expect_error("RULE a WHEN PM25 >= 5 THEN Good", 1, "expected CATEGORY");
  expect_error("RULE a WHEN PM25 >= 5 THEN CATEGORY Great", 1, "unknown category");
  expect_error("RULE a WHEN PM25 >= 5 THEN CATEGORY Good SEVERITY 1.5", 1, "integer severity");
  expect_error("RULE a WHEN PM25 >= 5 THEN CATEGORY Good\nRULE a WHEN O3 > 1 THEN CATEGORY Poor",
               2, "duplicate rule name");
}

TEST_CASE("rule matching is a conjunction over readings") {
  RuleSet rs = parse_rules("RULE r WHEN PM25 >= 10 AND PM25 <= 20 AND O3 > 5 THEN CATEGORY Good\n");
  std::array<double, kPollutantCount> v{};
  auto set = [&](Pollutant p, double x) { v[static_cast<int>(p)] = x; };
  set(Pollutant::PM25, 15);
  set(Pollutant::O3, 6);
  CHECK(rule_matches(rs.rules[0], v));
  set(Pollutant::O3, 5);
  CHECK_FALSE(rule_matches(rs.rules[0], v));
  set(Pollutant::O3, 6);
  set(Pollutant::PM25, 10);
  CHECK(rule_matches(rs.rules[0], v));
  set(Pollutant::PM25, 9.999);
  CHECK_FALSE(rule_matches(rs.rules[0], v));
}

TEST_CASE("print_rules emits canonical text that reparses identically") {
  std::string canonical =
      "RULE r1 WHEN PM25 >= 55.5 AND PM25 <= 150.4 AND O3 >= 51 AND O3 <= 75 "
      "THEN CATEGORY ModeratelyPolluted\n";
  RuleSet rs = parse_rules(canonical);
  CHECK(print_rules(rs) == canonical);
  CHECK(parse_rules(print_rules(rs)) == rs);
}

TEST_CASE("round-trip holds across generated rule sets") {
  for (unsigned seed = 0; seed < 200; ++seed) {
    RuleSet rs = synth_rules(4, seed);
    CHECK(parse_rules(print_rules(rs)) == rs);
  }
}

TEST_CASE("shipped corrected fixture equals the builtin sample set") {
  std::ifstream in(std::string(AIRCEP_DATA_DIR) + "/rules_corrected.rules");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  RuleSet rs = parse_rules(ss.str());
  CHECK(rs == sample_rules());
}

TEST_CASE("validation flags the contradictory PM25 bounds exactly once") {
  std::ifstream in(std::string(AIRCEP_DATA_DIR) + "/rules_draft.rules");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<Diagnostic> diags =
      validate_ruleset(parse_rules(ss.str()), BreakpointTable::cpcb_default());
  std::vector<Diagnostic> errors;
  for (const Diagnostic& d : diags)
    if (d.severity == Diagnostic::Severity::Error) errors.push_back(d);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].kind == Diagnostic::Kind::Unsatisfiable);
  CHECK(errors[0].rule == "r3");
}

TEST_CASE("corrected sample set validates without errors") {
  std::vector<Diagnostic> diags =
      validate_ruleset(sample_rules(), BreakpointTable::cpcb_default());
  for (const Diagnostic& d : diags) CHECK(d.severity == Diagnostic::Severity::Warning);
}

TEST_CASE("unsatisfiable detection honors comparator strictness") {
  auto diag_kinds = [](std::string_view text) {
    return validate_ruleset(parse_rules(text), BreakpointTable::cpcb_default());
  };
  // [10, 10] is satisfiable; (10, 10) and crossed bounds are not
  CHECK(diag_kinds("RULE a WHEN PM25 >= 10 AND PM25 <= 10 THEN CATEGORY Good\n").empty());
  auto d1 = diag_kinds("RULE a WHEN PM25 > 10 AND PM25 <= 10 THEN CATEGORY Good\n");
  REQUIRE(d1.size() == 1);
  CHECK(d1[0].kind == Diagnostic::Kind::Unsatisfiable);
  auto d2 = diag_kinds("RULE a WHEN PM25 >= 10 AND PM25 < 10 THEN CATEGORY Good\n");
  REQUIRE(d2.size() == 1);
  CHECK(d2[0].kind == Diagnostic::Kind::Unsatisfiable);
}

TEST_CASE("cross-band containment warns when the asserted category disagrees") {
  // PM25 in [0, 12] sits inside the Good band (sub-index <= 20)
  auto diags = validate_ruleset(
      parse_rules("RULE a WHEN PM25 >= 0 AND PM25 <= 12 THEN CATEGORY Severe\n"),
      BreakpointTable::cpcb_default());
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].kind == Diagnostic::Kind::CrossBand);
  CHECK(diags[0].severity == Diagnostic::Severity::Warning);

  auto ok = validate_ruleset(
      parse_rules("RULE a WHEN PM25 >= 0 AND PM25 <= 12 THEN CATEGORY Good\n"),
      BreakpointTable::cpcb_default());
  CHECK(ok.empty());

  // straddling two bands asserts nothing
  auto straddle = validate_ruleset(
      parse_rules("RULE a WHEN PM25 >= 25 AND PM25 <= 45 THEN CATEGORY Severe\n"),
      BreakpointTable::cpcb_default());
  CHECK(straddle.empty());
}

TEST_CASE("overlapping rules with different categories warn pairwise") {
  auto diags = validate_ruleset(
      parse_rules("RULE a WHEN PM25 >= 10 AND PM25 <= 30 THEN CATEGORY Good\n"
                  "RULE b WHEN PM25 >= 20 AND PM25 <= 40 THEN CATEGORY Poor\n"
                  "RULE c WHEN PM25 >= 50 THEN CATEGORY Severe\n"),
      BreakpointTable{});
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].kind == Diagnostic::Kind::OverlapConflict);
  CHECK(diags[0].rule == "a & b");

  // same category overlap is fine
  auto same = validate_ruleset(
      parse_rules("RULE a WHEN PM25 >= 10 AND PM25 <= 30 THEN CATEGORY Good\n"
                  "RULE b WHEN PM25 >= 20 AND PM25 <= 40 THEN CATEGORY Good\n"),
      BreakpointTable{});
  CHECK(same.empty());

  // disjoint on a shared pollutant is fine
  auto disjoint = validate_ruleset(
      parse_rules("RULE a WHEN PM25 >= 10 AND PM25 < 20 THEN CATEGORY Good\n"
                  "RULE b WHEN PM25 >= 20 AND PM25 <= 40 THEN CATEGORY Poor\n"),
      BreakpointTable{});
  CHECK(disjoint.empty());
}

TEST_CASE("empty ruleset parses and validates to nothing") {
  RuleSet rs = parse_rules("# nothing but comments\n\n");
  CHECK(rs.rules.empty());
  CHECK(print_rules(rs).empty());
  CHECK(validate_ruleset(rs, BreakpointTable::cpcb_default()).empty());
}
