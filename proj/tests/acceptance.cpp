// Acceptance gate: one [PASS]/[FAIL] line per criterion, exit status is the
// number of failures. Criteria with timing thresholds print the measured
// numbers; the static-vs-stream criterion reports ratios without asserting.
#include <chrono>
#include <cstdio>
#include <deque>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "aircep/aqi.hpp"
#include "aircep/bench.hpp"
#include "aircep/engine.hpp"
#include "aircep/io.hpp"
#include "aircep/mining.hpp"
#include "aircep/query.hpp"
#include "aircep/rules.hpp"
#include "aircep/synth.hpp"
#include "aircep/triples.hpp"

using namespace aircep;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void fail(const std::string& note) {
    pass = false;
    notes.push_back(note);
  }
  void note(const std::string& n) { notes.push_back(n); }
};

std::string data_path(const std::string& name) {
  return std::string(AIRCEP_DATA_DIR) + "/" + name;
}

std::string fmt(double v) { return format_double(v); }

// Rounded form for the human-facing notes; failures keep full precision.
std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Graph graph_of(std::span<const Event> events) {
  GraphBuilder b;
  for (const Event& e : events) b.add(std::span<const Triple>(event_to_triples(e)));
  return std::move(b).freeze();
}

// ---------------------------------------------------------------------------
// 1. Sub-index interpolation against an independently coded oracle.

double oracle_sub_index(std::span<const BreakpointRow> rows, double c) {
  std::size_t pick = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double upper = (i + 1 < rows.size()) ? rows[i + 1].conc_lo
                                         : std::numeric_limits<double>::infinity();
    if (c >= rows[i].conc_lo && c < upper) pick = i;
  }
  const BreakpointRow& r = rows[pick];
  double span_c = r.conc_hi - r.conc_lo;
  double v = r.aqi_lo + (c - r.conc_lo) / span_c * (r.aqi_hi - r.aqi_lo);
  if (v < r.aqi_lo) v = r.aqi_lo;
  if (v > r.aqi_hi) v = r.aqi_hi;
  return v;
}

Outcome criterion_sub_index_oracle() {
  Outcome out;
  const BreakpointTable& t = BreakpointTable::cpcb_default();
  std::mt19937 rng(101);
  for (Pollutant p : kAllPollutants) {
    if (!t.has(p)) continue;
    auto rows = t.rows(p);
    double top = rows.back().conc_hi;
    std::uniform_real_distribution<double> dist(0.0, 1.3 * top);
    for (int i = 0; i < 1000; ++i) {
      double c = dist(rng);
      double lib = sub_index(t, p, c).value;
      double want = oracle_sub_index(rows, c);
      if (std::abs(lib - want) > 1e-9) {
        out.fail(std::string(pollutant_name(p)) + " at " + fmt(c) + ": " + fmt(lib) +
                 " != " + fmt(want));
        return out;
      }
    }
  }
  const std::vector<std::tuple<Pollutant, double, double>> anchors = {
      {Pollutant::PM25, 30, 50}, {Pollutant::PM10, 50, 50}, {Pollutant::CO, 1.0, 50},
      {Pollutant::NO2, 80, 100}, {Pollutant::O3, 100, 100},
  };
  for (const auto& [p, c, want] : anchors)
    if (sub_index(t, p, c).value != want)
      out.fail(std::string(pollutant_name(p)) + " anchor " + fmt(c) + " != " + fmt(want));
  return out;
}

// ---------------------------------------------------------------------------
// 2. Validity rules over every presence mask.

Outcome criterion_validity_masks() {
  Outcome out;
  const BreakpointTable& t = BreakpointTable::cpcb_default();
  const std::array<double, kPollutantCount> fixed = {45, 90, 30, 60, 40, 120, 1.2, 50, 110};
  for (unsigned mask = 0; mask < (1u << kPollutantCount); ++mask) {
    std::array<std::optional<double>, kPollutantCount> readings;
    int present = 0;
    for (int pi = 0; pi < kPollutantCount; ++pi)
      if (mask & (1u << pi)) {
        readings[pi] = fixed[pi];
        ++present;
      }
    bool has_pm = readings[static_cast<int>(Pollutant::PM25)].has_value() ||
                  readings[static_cast<int>(Pollutant::PM10)].has_value();
    bool expect_valid = present >= 3 && has_pm;

    double want = -1;
    Pollutant dominant = Pollutant::PM25;
    if (expect_valid)
      for (int pi = 0; pi < kPollutantCount; ++pi) {
        Pollutant p = static_cast<Pollutant>(pi);
        if (!readings[pi] || !t.has(p)) continue;
        double v = sub_index(t, p, *readings[pi]).value;
        if (v > want) {
          want = v;
          dominant = p;
        }
      }

    std::optional<AqiResult> got = compute_aqi(t, readings);
    if (got.has_value() != expect_valid) {
      out.fail("mask " + std::to_string(mask) + ": validity mismatch");
      return out;
    }
    if (got && (got->aqi != want || got->dominant != dominant)) {
      out.fail("mask " + std::to_string(mask) + ": aqi " + fmt(got->aqi) + " != " + fmt(want));
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// 3. Engine alerts equal nested-loop evaluation, in order, under a second.

std::vector<Alert> nested_loop_alerts(std::span<const Event> events, const RuleSet& rs) {
  std::vector<Alert> out;
  for (const Event& e : events)
    for (const Rule& r : rs.rules) {
      bool fires = true;
      for (const Condition& c : r.conditions)
        if (!compare(e.readings[static_cast<int>(c.pollutant)], c.cmp, c.threshold)) {
          fires = false;
          break;
        }
      if (!fires) continue;
      Alert a;
      a.rule_name = r.name;
      a.event_seq = e.seq;
      a.station = e.station;
      a.timestamp = e.timestamp;
      a.category = r.category;
      std::set<Pollutant> seen;
      for (const Condition& c : r.conditions)
        if (seen.insert(c.pollutant).second)
          a.matched_values.emplace_back(c.pollutant, e.readings[static_cast<int>(c.pollutant)]);
      out.push_back(std::move(a));
    }
  return out;
}

Outcome criterion_engine_oracle() {
  Outcome out;
  RuleSet rs = sample_rules();
  std::vector<Event> events = synth_events(500, 42);
  CepEngine engine;
  engine.deploy_rules(rs);
  std::vector<Alert> got;
  auto t0 = std::chrono::steady_clock::now();
  engine.run_stream(events, [&](const Alert& a) { got.push_back(a); });
  double secs = seconds_since(t0);
  if (got != nested_loop_alerts(events, rs)) out.fail("alert streams differ");
  if (secs >= 1.0) out.fail("run took " + fmt(secs) + "s, limit 1s");
  out.note("500 events, " + std::to_string(got.size()) + " alerts in " + fmt3(secs) + "s");
  return out;
}

// ---------------------------------------------------------------------------
// 4. Compiled queries select exactly the firing events.

Outcome criterion_rule_query_equivalence() {
  Outcome out;
  RuleSet rs = synth_rules(25, 7);
  std::vector<Event> events = synth_events(200, 11);
  Graph g = graph_of(events);
  for (const Rule& r : rs.rules) {
    std::set<std::string> expect;
    for (const Event& e : events)
      if (rule_matches(r, e.readings)) expect.insert(event_subject(e.seq));
    std::set<std::string> got;
    for (const auto& row : eval_static(g, compile_rule_to_query(r)).rows)
      got.insert(row.at(0).text);
    if (got != expect) {
      out.fail("rule " + r.name + ": " + std::to_string(got.size()) + " query subjects vs " +
               std::to_string(expect.size()) + " firing events");
      return out;
    }
  }
  out.note("25 rules over a 200-event graph");
  return out;
}

// ---------------------------------------------------------------------------
// 5. Stream/static agreement on the five-chunk synthetic corpus.

Outcome criterion_stream_static_agreement() {
  Outcome out;
  const std::vector<std::size_t> sizes = {5000, 10000, 15000, 20000, 25000};
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  std::vector<Event> events = synth_events(total, 7);
  Graph merged = graph_of(events);
  for (const char* name : {"q1.rq", "q2.rq", "q3.rq", "q4.rq", "q5.rq"}) {
    QueryAst q = parse_query(read_text_file(data_path("queries/") + name));
    ResultSet stat = eval_static(merged, q);
    for (std::size_t batch : {std::size_t{1000}, std::size_t{5000}, total}) {
      StreamEvalResult stream = eval_stream_batched(events, q, batch);
      if (stream.result.rows != stat.rows) {
        out.fail(std::string(name) + " batch " + std::to_string(batch) + ": " +
                 std::to_string(stream.result.rows.size()) + " rows vs " +
                 std::to_string(stat.rows.size()));
        return out;
      }
    }
  }
  out.note(std::to_string(total) + " events, 5 queries, batch sizes 1000/5000/total");
  return out;
}

// ---------------------------------------------------------------------------
// 6. Deployment-scaling medians: non-decreasing, 8000 >= 2x 1000.

Outcome criterion_deploy_scaling_trend() {
  Outcome out;
  BenchSpec spec;
  spec.scenario = "rule_deploy_scaling";
  BenchReport report = run_bench_suite(spec);
  std::vector<std::pair<std::size_t, double>> medians;
  for (const BenchRow& row : report.rows)
    if (row.metric == "end_to_end_seconds") {
      std::size_t count = std::stoul(row.config.substr(std::string("events=").size()));
      medians.emplace_back(count, row.median);
    }
  if (medians.size() != 8) {
    out.fail("expected 8 event counts, got " + std::to_string(medians.size()));
    return out;
  }
  for (std::size_t i = 1; i < medians.size(); ++i)
    if (medians[i].second < medians[i - 1].second)
      out.fail("median at " + std::to_string(medians[i].first) + " events (" +
               fmt(medians[i].second) + "s) below " + std::to_string(medians[i - 1].first) +
               " events (" + fmt(medians[i - 1].second) + "s)");
  double first = medians.front().second, last = medians.back().second;
  if (!(last >= 2.0 * first))
    out.fail("8000-event median " + fmt(last) + "s not >= 2x 1000-event median " + fmt(first) +
             "s");
  out.note("medians " + fmt3(first) + "s at 1000 -> " + fmt3(last) + "s at 8000 (" +
           fmt3(last / first) + "x)");
  return out;
}

// ---------------------------------------------------------------------------
// 7. The complex query's median exceeds each simple query's on every
//    combination tested.

Outcome criterion_complex_vs_simple() {
  Outcome out;
  BenchSpec spec;
  spec.scenario = "chunk_queries";
  spec.base_dir = AIRCEP_DATA_DIR;
  spec.query_files = {"queries/q1.rq", "queries/q2.rq", "queries/q3.rq", "queries/q4.rq",
                      "queries/q5.rq"};
  BenchReport report = run_bench_suite(spec);
  std::map<std::string, std::map<std::string, double>> by_combo;
  for (const BenchRow& row : report.rows) {
    std::size_t space = row.config.find(' ');
    std::string combo = row.config.substr(std::string("combo=").size(),
                                          space - std::string("combo=").size());
    std::string query = row.config.substr(space + std::string(" query=").size());
    by_combo[combo][query] = row.median;
  }
  double worst_margin = std::numeric_limits<double>::infinity();
  std::size_t combos = 0;
  for (const auto& [combo, medians] : by_combo) {
    ++combos;
    double complex_median = medians.at("q1");
    for (const char* simple : {"q2", "q3", "q4", "q5"}) {
      double ratio = complex_median / medians.at(simple);
      worst_margin = std::min(worst_margin, ratio);
      if (!(complex_median > medians.at(simple)))
        out.fail("combo " + combo + ": q1 median " + fmt(complex_median) + "s not above " +
                 simple + " median " + fmt(medians.at(simple)) + "s");
    }
  }
  out.note(std::to_string(combos) + " combinations; worst complex/simple ratio " +
           fmt3(worst_margin));
  return out;
}

// ---------------------------------------------------------------------------
// 8. Static vs stream: measured ratios reported beside the shipped
//    reference ratios, never asserted.

Outcome criterion_static_stream_report() {
  Outcome out;
  BenchSpec spec;
  spec.scenario = "static_vs_stream";
  spec.base_dir = AIRCEP_DATA_DIR;
  spec.query_files = {"queries/q1.rq", "queries/q2.rq", "queries/q3.rq", "queries/q4.rq",
                      "queries/q5.rq"};
  BenchReport report = run_bench_suite(spec);
  std::map<std::string, std::map<std::string, double>> measured;
  for (const BenchRow& row : report.rows) {
    std::string query = row.config.substr(std::string("query=").size());
    measured[query][row.metric] = row.median;
  }

  std::map<std::string, std::map<std::string, double>> reference;
  std::istringstream ref(read_text_file(data_path("reference_timings.csv")));
  std::string line;
  while (std::getline(ref, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("scenario,", 0) == 0) continue;
    std::istringstream fields(line);
    std::string scenario, config, metric, seconds;
    std::getline(fields, scenario, ',');
    std::getline(fields, config, ',');
    std::getline(fields, metric, ',');
    std::getline(fields, seconds, ',');
    if (scenario != "static_vs_stream") continue;
    reference[config.substr(std::string("query=").size())][metric] = *parse_double(seconds);
  }

  for (const auto& [query, m] : measured) {
    double observed = m.at("static_seconds") / m.at("stream_seconds");
    double ref_ratio =
        reference.at(query).at("static_seconds") / reference.at(query).at("stream_seconds");
    out.note(query + ": static/stream observed " + fmt3(observed) + ", reference " +
             fmt3(ref_ratio));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 9. Round-trips over 1000 generated instances each.

Outcome criterion_round_trips() {
  Outcome out;
  for (unsigned i = 0; i < 1000; ++i) {
    std::mt19937 rng(i);
    RuleSet rs;
    rs.rules.push_back(synth_rule(rng, "p" + std::to_string(i)));
    if (parse_rules(print_rules(rs)) != rs) {
      out.fail("rule round-trip broke at seed " + std::to_string(i));
      return out;
    }
    QueryAst q = compile_rule_to_query(rs.rules[0]);
    if (parse_query(print_query(q)) != q) {
      out.fail("query round-trip broke at seed " + std::to_string(i));
      return out;
    }
    std::vector<Event> events = synth_events(2, i, i % 10 ? "S" + std::to_string(i)
                                                          : "S \"\\\n\t" + std::to_string(i));
    Graph g = graph_of(events);
    if (parse_ntriples(serialize_ntriples(g)) != g) {
      out.fail("triple round-trip broke at seed " + std::to_string(i));
      return out;
    }
  }
  out.note("1000 rules, 1000 queries, 1000 graphs");
  return out;
}

// ---------------------------------------------------------------------------
// 10. Mining on noisy threshold data: accuracy and a true partition.

Outcome criterion_mining_sanity() {
  Outcome out;
  std::vector<LabeledRow> rows = synth_threshold_rows(1000, 30, 0.05, 7);
  MiningResult result = mine_rules(rows);
  if (!result.holdout_accuracy) {
    out.fail("no holdout accuracy reported");
    return out;
  }
  if (*result.holdout_accuracy < 0.90)
    out.fail("holdout accuracy " + fmt(*result.holdout_accuracy) + " below 0.90");
  out.note("holdout accuracy " + fmt3(*result.holdout_accuracy) + ", " +
           std::to_string(result.rules.rules.size()) + " rules");

  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> dist(0.0, 120.0);
  for (int i = 0; i < 10000; ++i) {
    std::array<double, kPollutantCount> v;
    for (int pi = 0; pi < kPollutantCount; ++pi) v[pi] = dist(rng);
    const Rule* matched = nullptr;
    int matches = 0;
    for (const Rule& r : result.rules.rules)
      if (rule_matches(r, v)) {
        ++matches;
        matched = &r;
      }
    if (matches != 1) {
      out.fail("vector " + std::to_string(i) + " matched " + std::to_string(matches) +
               " rules");
      return out;
    }
    if (matched->category != predict(*result.tree, v)) {
      out.fail("vector " + std::to_string(i) + ": rule category disagrees with the tree");
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// 11. Validation reports exactly one unsatisfiable rule on the draft set.

Outcome criterion_validation_catches_draft() {
  Outcome out;
  RuleSet rs = parse_rules(read_text_file(data_path("rules_draft.rules")));
  std::vector<Diagnostic> diags = validate_ruleset(rs, BreakpointTable::cpcb_default());
  std::vector<std::string> unsat;
  for (const Diagnostic& d : diags)
    if (d.kind == Diagnostic::Kind::Unsatisfiable) unsat.push_back(d.rule);
  if (unsat.size() != 1)
    out.fail("expected exactly one unsatisfiable diagnostic, got " +
             std::to_string(unsat.size()));
  else if (unsat[0] != "r3")
    out.fail("unsatisfiable diagnostic names '" + unsat[0] + "', expected 'r3'");
  else
    out.note("rule r3 flagged, " + std::to_string(diags.size()) + " diagnostics total");
  return out;
}

// ---------------------------------------------------------------------------
// 12. Throughput smoke: 15000 events through 5 rules in under 5 seconds.

Outcome criterion_throughput_smoke() {
  Outcome out;
  std::vector<Event> events = synth_events(15000, 3);
  CepEngine engine;
  engine.deploy_rules(sample_rules());
  auto t0 = std::chrono::steady_clock::now();
  EngineMetrics m = engine.run_stream(events, nullptr);
  double secs = seconds_since(t0);
  if (secs >= 5.0) out.fail("took " + fmt(secs) + "s, limit 5s");
  out.note("15000 events, " + std::to_string(m.alerts_emitted) + " alerts in " + fmt3(secs) +
           "s");
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"sub-index interpolation matches an independent oracle", criterion_sub_index_oracle},
      {"validity rules hold over all presence masks", criterion_validity_masks},
      {"engine alerts equal nested-loop evaluation in order", criterion_engine_oracle},
      {"compiled queries select exactly the firing events", criterion_rule_query_equivalence},
      {"stream and static evaluation agree on the chunked corpus",
       criterion_stream_static_agreement},
      {"deployment-scaling medians are non-decreasing and reach 2x",
       criterion_deploy_scaling_trend},
      {"the complex query is slower than every simple query", criterion_complex_vs_simple},
      {"static-vs-stream ratios reported for inspection", criterion_static_stream_report},
      {"parse/print round-trips hold over generated instances", criterion_round_trips},
      {"mined rules reach 90% holdout accuracy and partition inputs",
       criterion_mining_sanity},
      {"validation flags exactly one unsatisfiable rule", criterion_validation_catches_draft},
      {"15000 events through 5 rules finish within 5 seconds", criterion_throughput_smoke},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& ex) {
      out.fail(std::string("exception: ") + ex.what());
    }
    if (!out.pass) ++failures;
    std::printf("[%s] %02zu %s\n", out.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str());
    for (const std::string& n : out.notes) std::printf("       %s\n", n.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures;
}
