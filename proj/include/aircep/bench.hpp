#pragma once

#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "aircep/core.hpp"
#include "aircep/engine.hpp"
#include "aircep/io.hpp"
#include "aircep/query.hpp"
#include "aircep/rules.hpp"
#include "aircep/synth.hpp"
#include "aircep/triples.hpp"

namespace aircep {

inline const std::vector<std::string>& bench_scenarios() {
  static const std::vector<std::string> names = {
      "event_scaling", "rule_deploy_scaling", "chunk_queries", "static_vs_stream",
      "chunk_event_processing"};
  return names;
}

struct BenchSpec {
  std::string scenario;
  std::vector<std::size_t> event_counts;
  std::string rules_file;                // empty = bundled sample rules
  std::vector<std::string> query_files;  // resolved against base_dir
  std::vector<std::size_t> chunk_sizes = {5000, 10000, 15000, 20000, 25000};
  std::size_t repetitions = 5;
  std::size_t warmup = 1;
  unsigned seed = 7;
  std::size_t batch_size = 5000;
  bool all_combinations = false;
  std::string base_dir = ".";
};

struct EnvironmentFingerprint {
  std::string cpu;
  unsigned cores = 0;
  std::string os;
  std::string build_profile;
};

struct BenchRow {
  std::string scenario;
  std::string config;
  std::string metric;
  std::size_t repetitions = 0;
  double median = 0;
  double min = 0;
  double max = 0;
  std::string units = "s";
  bool unreliable = false;
};

struct BenchReport {
  EnvironmentFingerprint env;
  std::vector<BenchRow> rows;
};

// ---------------------------------------------------------------------------
// Spec file: `key = value` lines, '#' comments.

namespace bench_detail {

inline std::vector<std::size_t> parse_count_list(std::string_view v, std::string_view key) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t comma = v.find(',', pos);
    std::string_view item = trim(v.substr(pos, (comma == std::string_view::npos ? v.size() : comma) - pos));
    pos = (comma == std::string_view::npos) ? v.size() + 1 : comma + 1;
    if (item.empty()) continue;
    auto n = parse_int(item);
    if (!n || *n <= 0)
      throw DomainError("bench spec: " + std::string(key) + " needs positive integers, got '" +
                        std::string(item) + "'");
    out.push_back(static_cast<std::size_t>(*n));
  }
  return out;
}

inline std::vector<std::string> parse_name_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t comma = v.find(',', pos);
    std::string_view item = trim(v.substr(pos, (comma == std::string_view::npos ? v.size() : comma) - pos));
    pos = (comma == std::string_view::npos) ? v.size() + 1 : comma + 1;
    if (!item.empty()) out.emplace_back(item);
  }
  return out;
}

}  // namespace bench_detail

inline BenchSpec parse_bench_spec(std::string_view text, const std::string& base_dir) {
  BenchSpec spec;
  spec.base_dir = base_dir;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, (eol == std::string_view::npos ? text.size() : eol) - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    std::string_view body = line.substr(0, line.find('#'));
    body = trim(body);
    if (body.empty()) continue;
    std::size_t eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(line_no, 1, "bench spec lines are 'key = value'");
    std::string key(trim(body.substr(0, eq)));
    std::string value(trim(body.substr(eq + 1)));
    if (key == "scenario") spec.scenario = value;
    else if (key == "events") spec.event_counts = bench_detail::parse_count_list(value, key);
    else if (key == "rules") spec.rules_file = value;
    else if (key == "queries") spec.query_files = bench_detail::parse_name_list(value);
    else if (key == "chunk_sizes") spec.chunk_sizes = bench_detail::parse_count_list(value, key);
    else if (key == "repetitions") {
      auto n = parse_int(value);
      if (!n || *n < 0) throw ParseError(line_no, 1, "bad repetitions");
      spec.repetitions = static_cast<std::size_t>(*n);
    } else if (key == "warmup") {
      auto n = parse_int(value);
      if (!n || *n < 0) throw ParseError(line_no, 1, "bad warmup");
      spec.warmup = static_cast<std::size_t>(*n);
    } else if (key == "seed") {
      auto n = parse_int(value);
      if (!n || *n < 0) throw ParseError(line_no, 1, "bad seed");
      spec.seed = static_cast<unsigned>(*n);
    } else if (key == "batch_size") {
      auto n = parse_int(value);
      if (!n || *n <= 0) throw ParseError(line_no, 1, "bad batch_size");
      spec.batch_size = static_cast<std::size_t>(*n);
    } else if (key == "all_combinations") {
      spec.all_combinations = (value == "1" || ascii_upper(value) == "TRUE");
    } else {
      throw ParseError(line_no, 1, "unknown bench spec key '" + key + "'");
    }
  }
  if (spec.scenario.empty()) throw DomainError("bench spec: scenario is required");
  const auto& known = bench_scenarios();
  if (std::find(known.begin(), known.end(), spec.scenario) == known.end())
    throw DomainError("bench spec: unknown scenario '" + spec.scenario + "'");
  if (spec.repetitions < 3)
    throw DomainError("bench spec: timing scenarios need repetitions >= 3");
  if (spec.warmup < 1) throw DomainError("bench spec: warmup >= 1 required");
  return spec;
}

// ---------------------------------------------------------------------------

inline EnvironmentFingerprint environment_fingerprint() {
  EnvironmentFingerprint env;
  env.cores = std::thread::hardware_concurrency();
  std::ifstream cpuinfo("/proc/cpuinfo");
  std::string line;
  while (std::getline(cpuinfo, line)) {
    if (line.rfind("model name", 0) == 0) {
      std::size_t colon = line.find(':');
      if (colon != std::string::npos) env.cpu = std::string(trim(line.substr(colon + 1)));
      break;
    }
  }
  if (env.cpu.empty()) env.cpu = "unknown";
  utsname uts{};
  if (uname(&uts) == 0)
    env.os = std::string(uts.sysname) + " " + uts.release + " " + uts.machine;
  else
    env.os = "unknown";
#ifdef NDEBUG
  env.build_profile = "release";
#else
  env.build_profile = "debug";
#endif
  return env;
}

/// Smallest observable nonzero steady_clock increment.
inline double timer_resolution_seconds() {
  static const double resolution = [] {
    using clock = std::chrono::steady_clock;
    double best = 1.0;
    for (int i = 0; i < 1000; ++i) {
      auto a = clock::now();
      auto b = clock::now();
      while (b == a) b = clock::now();
      double d = std::chrono::duration<double>(b - a).count();
      if (d > 0 && d < best) best = d;
    }
    return best;
  }();
  return resolution;
}

namespace bench_detail {

struct Stats {
  double median = 0, min = 0, max = 0;
};

inline Stats stats_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  Stats s;
  s.min = xs.front();
  s.max = xs.back();
  std::size_t n = xs.size();
  s.median = (n % 2) ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
  return s;
}

/// Runs warmup + repetitions, keeps post-warmup timings only.
template <typename F>
inline Stats time_reps(std::size_t warmup, std::size_t repetitions, F&& body) {
  std::vector<double> timings;
  for (std::size_t i = 0; i < warmup + repetitions; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    body();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (i >= warmup) timings.push_back(secs);
  }
  return stats_of(std::move(timings));
}

inline void add_row(BenchReport& report, const std::string& scenario, const std::string& config,
                    const std::string& metric, std::size_t reps, const Stats& s) {
  BenchRow row;
  row.scenario = scenario;
  row.config = config;
  row.metric = metric;
  row.repetitions = reps;
  row.median = s.median;
  row.min = s.min;
  row.max = s.max;
  row.unreliable = s.median < 10.0 * timer_resolution_seconds();
  report.rows.push_back(std::move(row));
}

inline RuleSet load_rules_for(const BenchSpec& spec) {
  if (spec.rules_file.empty()) return sample_rules();
  std::filesystem::path p = std::filesystem::path(spec.base_dir) / spec.rules_file;
  std::ifstream in(p);
  if (!in) throw DomainError("bench spec: rules file not found: " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rules(buf.str());
}

struct NamedQuery {
  std::string name;
  QueryAst ast;
};

inline std::vector<NamedQuery> load_queries_for(const BenchSpec& spec) {
  if (spec.query_files.empty())
    throw DomainError("bench spec: scenario '" + spec.scenario + "' needs queries = <files>");
  std::vector<NamedQuery> out;
  for (const std::string& f : spec.query_files) {
    std::filesystem::path p = std::filesystem::path(spec.base_dir) / f;
    std::ifstream in(p);
    if (!in) throw DomainError("bench spec: query file not found: " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    out.push_back(NamedQuery{p.stem().string(), parse_query(buf.str())});
  }
  return out;
}

/// The curated combination selection: singles, then five fixed 2-, 3-, and
/// 4-element subsets of A-E.
inline std::vector<std::vector<std::size_t>> curated_combinations(std::size_t n_chunks) {
  static const std::vector<std::vector<std::size_t>> fixed = {
      {0}, {1}, {2}, {3}, {4},
      {0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2},
      {0, 1, 2}, {0, 1, 3}, {0, 1, 4}, {0, 2, 3}, {0, 2, 4},
      {0, 1, 2, 3}, {0, 1, 2, 4}, {0, 1, 3, 4}, {0, 2, 3, 4}, {1, 2, 3, 4},
  };
  std::vector<std::vector<std::size_t>> out;
  for (const auto& combo : fixed) {
    bool ok = true;
    for (std::size_t i : combo)
      if (i >= n_chunks) ok = false;
    if (ok) out.push_back(combo);
  }
  return out;
}

inline std::vector<std::vector<std::size_t>> all_combinations(std::size_t n_chunks) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t mask = 1; mask < (std::size_t(1) << n_chunks); ++mask) {
    std::vector<std::size_t> combo;
    for (std::size_t i = 0; i < n_chunks; ++i)
      if (mask & (std::size_t(1) << i)) combo.push_back(i);
    out.push_back(std::move(combo));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

inline std::string combo_label(const std::vector<std::size_t>& combo) {
  std::string out;
  for (std::size_t i = 0; i < combo.size(); ++i) {
    if (i) out += "+";
    out += chunk_label(combo[i]);
  }
  return out;
}

}  // namespace bench_detail

/// Executes the spec's scenario with warmup then timed repetitions; engine
/// and query state rebuild from scratch each repetition.
inline BenchReport run_bench_suite(const BenchSpec& spec) {
  using namespace bench_detail;
  BenchReport report;
  report.env = environment_fingerprint();
  const std::size_t reps = spec.repetitions;

  if (spec.scenario == "event_scaling") {
    std::vector<std::size_t> counts =
        spec.event_counts.empty() ? std::vector<std::size_t>{5000, 10000, 15000}
                                  : spec.event_counts;
    RuleSet rs = load_rules_for(spec);
    std::size_t max_count = *std::max_element(counts.begin(), counts.end());
    std::vector<Event> events = synth_events(max_count, spec.seed);
    for (std::size_t count : counts) {
      std::span<const Event> slice(events.data(), count);
      for (const Rule& rule : rs.rules) {
        RuleSet single;
        single.rules.push_back(rule);
        Stats s = time_reps(spec.warmup, reps, [&] {
          CepEngine engine;
          engine.deploy_rules(single);
          engine.run_stream(slice, nullptr);
        });
        add_row(report, spec.scenario, "events=" + std::to_string(count) + " rule=" + rule.name,
                "process_seconds", reps, s);
      }
    }
    return report;
  }

  if (spec.scenario == "rule_deploy_scaling") {
    std::vector<std::size_t> counts = spec.event_counts;
    if (counts.empty())
      for (std::size_t n = 1000; n <= 8000; n += 1000) counts.push_back(n);
    RuleSet rs = load_rules_for(spec);
    std::size_t max_count = *std::max_element(counts.begin(), counts.end());
    std::vector<Event> events = synth_events(max_count, spec.seed);
    for (std::size_t count : counts) {
      std::span<const Event> slice(events.data(), count);
      std::vector<double> deploys, processes, totals;
      for (std::size_t i = 0; i < spec.warmup + reps; ++i) {
        CepEngine engine;
        auto t0 = std::chrono::steady_clock::now();
        engine.deploy_rules(rs);
        auto t1 = std::chrono::steady_clock::now();
        engine.run_stream(slice, nullptr);
        auto t2 = std::chrono::steady_clock::now();
        if (i < spec.warmup) continue;
        deploys.push_back(std::chrono::duration<double>(t1 - t0).count());
        processes.push_back(std::chrono::duration<double>(t2 - t1).count());
        totals.push_back(std::chrono::duration<double>(t2 - t0).count());
      }
      std::string config = "events=" + std::to_string(count);
      add_row(report, spec.scenario, config, "deploy_seconds", reps, stats_of(deploys));
      add_row(report, spec.scenario, config, "process_seconds", reps, stats_of(processes));
      add_row(report, spec.scenario, config, "end_to_end_seconds", reps, stats_of(totals));
    }
    return report;
  }

  if (spec.scenario == "chunk_queries" || spec.scenario == "static_vs_stream") {
    auto queries = load_queries_for(spec);
    std::size_t total = std::accumulate(spec.chunk_sizes.begin(), spec.chunk_sizes.end(),
                                        std::size_t{0});
    std::vector<Event> events = synth_events(total, spec.seed);
    std::vector<TripleChunk> chunks = chunk_graph(events, spec.chunk_sizes);

    if (spec.scenario == "chunk_queries") {
      auto combos = spec.all_combinations ? all_combinations(chunks.size())
                                          : curated_combinations(chunks.size());
      for (const auto& combo : combos) {
        std::vector<TripleChunk> members;
        for (std::size_t i : combo) members.push_back(chunks[i]);
        TripleChunk merged = merge_chunks(members);
        for (const auto& q : queries) {
          Stats s = time_reps(spec.warmup, reps, [&] { eval_static(merged.graph, q.ast); });
          add_row(report, spec.scenario, "combo=" + combo_label(combo) + " query=" + q.name,
                  "eval_seconds", reps, s);
        }
      }
      return report;
    }

    TripleChunk merged = merge_chunks(chunks);
    for (const auto& q : queries) {
      std::string config = "query=" + q.name;
      Stats stat = time_reps(spec.warmup, reps, [&] { eval_static(merged.graph, q.ast); });
      add_row(report, spec.scenario, config, "static_seconds", reps, stat);
      Stats stream = time_reps(spec.warmup, reps, [&] {
        eval_stream_batched(std::span<const TripleChunk>(chunks), q.ast);
      });
      add_row(report, spec.scenario, config, "stream_seconds", reps, stream);
    }
    return report;
  }

  // chunk_event_processing
  RuleSet rs = load_rules_for(spec);
  std::size_t total =
      std::accumulate(spec.chunk_sizes.begin(), spec.chunk_sizes.end(), std::size_t{0});
  std::vector<Event> events = synth_events(total, spec.seed);
  std::size_t at = 0;
  for (std::size_t k = 0; k < spec.chunk_sizes.size(); ++k) {
    std::span<const Event> slice(events.data() + at, spec.chunk_sizes[k]);
    at += spec.chunk_sizes[k];
    Stats s = time_reps(spec.warmup, reps, [&] {
      CepEngine engine;
      engine.deploy_rules(rs);
      engine.run_stream(slice, nullptr);
    });
    add_row(report, spec.scenario,
            "chunk=" + chunk_label(k) + " events=" + std::to_string(spec.chunk_sizes[k]),
            "process_seconds", reps, s);
  }
  return report;
}

/// CSV with a commented, schema-tagged header; byte-stable for identical
/// report content.
inline std::string emit_report(const BenchReport& r) {
  if (r.rows.empty()) throw DomainError("refusing to emit an empty bench report");
  std::ostringstream out;
  out << "# schema: bench-report v1\n";
  out << "# cpu: " << r.env.cpu << "\n";
  out << "# cores: " << r.env.cores << "\n";
  out << "# os: " << r.env.os << "\n";
  out << "# build: " << r.env.build_profile << "\n";
  out << "scenario,config,metric,repetitions,median,min,max,units,unreliable\n";
  for (const BenchRow& row : r.rows) {
    out << row.scenario << ',' << row.config << ',' << row.metric << ',' << row.repetitions
        << ',' << format_double(row.median) << ',' << format_double(row.min) << ','
        << format_double(row.max) << ',' << row.units << ',' << (row.unreliable ? 1 : 0)
        << '\n';
  }
  return out.str();
}

inline void emit_report_file(const BenchReport& r, const std::string& path) {
  write_text_file(path, emit_report(r));
}

}  // namespace aircep
