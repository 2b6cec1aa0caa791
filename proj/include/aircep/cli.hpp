#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "aircep/aqi.hpp"
#include "aircep/bench.hpp"
#include "aircep/core.hpp"
#include "aircep/engine.hpp"
#include "aircep/ingest.hpp"
#include "aircep/io.hpp"
#include "aircep/mining.hpp"
#include "aircep/query.hpp"
#include "aircep/rules.hpp"
#include "aircep/synth.hpp"
#include "aircep/triples.hpp"

namespace aircep {

namespace cli_detail {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

inline RuleSet load_rules_file(const std::string& path) {
  return parse_rules(read_text_file(path));
}

inline BreakpointTable load_breakpoints(const std::string& path) {
  if (path.empty()) return BreakpointTable::cpcb_default();
  return BreakpointTable::from_csv_file(path);
}

inline int run_ingest(const std::string& input, const std::string& out,
                      const std::string& city) {
  LoadResult loaded = parse_dataset(input);
  Dataset imputed = impute_median(loaded.dataset);
  std::optional<std::string> filter;
  if (!city.empty()) filter = city;
  std::vector<Event> events = to_event_stream(imputed, filter);
  write_events_jsonl_file(out, events);
  std::cout << "rows_total=" << loaded.report.rows_total
            << " rows_kept=" << loaded.report.rows_kept
            << " rows_skipped=" << loaded.report.skipped.size()
            << " events_written=" << events.size() << "\n";
  for (const RowError& e : loaded.report.skipped)
    std::cerr << "skipped row " << e.row << ": " << e.message << "\n";
  return kExitOk;
}

inline int run_aqi_compute(const std::string& events_path, const std::string& breakpoints_path,
                           bool daily) {
  BreakpointTable table = load_breakpoints(breakpoints_path);
  std::vector<Event> events = read_events_jsonl_file(events_path);
  std::array<WindowSpec, kPollutantCount> specs;
  for (int pi = 0; pi < kPollutantCount; ++pi)
    specs[pi] = default_window_spec(static_cast<Pollutant>(pi), daily);
  std::map<std::string, std::array<std::vector<std::optional<double>>, kPollutantCount>> series;
  for (const Event& e : events) {
    auto& station_series = series[e.station];
    std::array<std::optional<double>, kPollutantCount> averaged;
    for (int pi = 0; pi < kPollutantCount; ++pi) {
      station_series[pi].push_back(e.readings[pi]);
      averaged[pi] = windowed_average(station_series[pi], specs[pi]);
    }
    std::optional<AqiResult> r = compute_aqi(table, averaged);
    nlohmann::json j;
    j["seq"] = e.seq;
    j["station"] = e.station;
    j["timestamp"] = format_iso8601(e.timestamp);
    if (r) {
      j["aqi"] = r->aqi;
      j["category"] = std::string(category_name(r->category));
      j["dominant"] = std::string(pollutant_name(r->dominant));
    } else {
      j["aqi"] = nullptr;
      j["category"] = nullptr;
      j["dominant"] = nullptr;
    }
    std::cout << j.dump() << "\n";
  }
  return kExitOk;
}

inline int run_rules_mine(const std::string& data_path, const std::string& out_path) {
  LoadResult loaded = parse_dataset(data_path);
  Dataset imputed = impute_median(loaded.dataset);
  std::vector<LabeledRow> rows = labeled_rows(imputed);
  MiningResult result = mine_rules(rows);
  write_text_file(out_path, print_rules(result.rules));
  std::cout << print_tree(*result.tree);
  std::cout << "train=" << result.train_count << " holdout=" << result.holdout_count;
  if (result.holdout_accuracy)
    std::cout << " holdout_accuracy=" << format_double(*result.holdout_accuracy);
  std::cout << " rules=" << result.rules.rules.size() << "\n";
  return kExitOk;
}

inline int run_rules_validate(const std::string& rules_path,
                              const std::string& breakpoints_path) {
  RuleSet rs = load_rules_file(rules_path);
  BreakpointTable table = load_breakpoints(breakpoints_path);
  std::vector<Diagnostic> diags = validate_ruleset(rs, table);
  std::size_t errors = 0;
  for (const Diagnostic& d : diags) {
    bool is_error = d.severity == Diagnostic::Severity::Error;
    if (is_error) ++errors;
    std::cout << (is_error ? "error" : "warning") << " [" << d.rule << "]: " << d.message
              << "\n";
  }
  std::cout << rs.rules.size() << " rules, " << errors << " errors, "
            << (diags.size() - errors) << " warnings\n";
  return errors ? kExitDomain : kExitOk;
}

inline int run_rdf_convert(const std::string& events_path, const std::string& out_dir,
                           std::size_t chunk_size, const std::vector<std::size_t>& sizes) {
  if (chunk_size > 0 && !sizes.empty())
    throw DomainError("--chunk-size and --sizes are mutually exclusive");
  std::vector<Event> events = read_events_jsonl_file(events_path);
  std::vector<TripleChunk> chunks;
  if (!sizes.empty()) chunks = chunk_graph(events, sizes);
  else if (chunk_size > 0) chunks = chunk_graph_tiled(events, chunk_size);
  else if (!events.empty()) chunks = chunk_graph(events, std::vector<std::size_t>{events.size()});
  std::filesystem::create_directories(out_dir);
  for (const TripleChunk& c : chunks) {
    std::filesystem::path p = std::filesystem::path(out_dir) / ("chunk_" + c.label + ".nt");
    write_text_file(p.string(), serialize_ntriples(c.graph));
    std::cout << c.label << "," << c.event_count << "," << c.graph.size() << "," << p.string()
              << "\n";
  }
  return kExitOk;
}

inline int run_rdf_kg(const std::string& out_path) {
  write_text_file(out_path, serialize_ntriples(default_knowledge_graph().graph));
  return kExitOk;
}

/// chunk_<L>.nt files under dir, optionally restricted to labels, in label
/// order.
inline std::vector<TripleChunk> load_chunk_dir(const std::string& dir,
                                               const std::vector<std::string>& labels) {
  std::vector<std::pair<std::string, std::filesystem::path>> found;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("chunk_", 0) != 0 || entry.path().extension() != ".nt") continue;
    std::string label = entry.path().stem().string().substr(6);
    if (!labels.empty() &&
        std::find(labels.begin(), labels.end(), label) == labels.end())
      continue;
    found.emplace_back(label, entry.path());
  }
  if (!labels.empty()) {
    for (const std::string& l : labels) {
      bool present = false;
      for (const auto& [label, path] : found) present = present || label == l;
      if (!present) throw DomainError("chunk '" + l + "' not found under " + dir);
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a.first < b.first;
  });
  std::vector<TripleChunk> chunks;
  for (const auto& [label, path] : found) {
    TripleChunk c;
    c.label = label;
    c.graph = parse_ntriples(read_text_file(path.string()));
    chunks.push_back(std::move(c));
  }
  if (chunks.empty()) throw DomainError("no chunk_<label>.nt files under " + dir);
  return chunks;
}

/// Partitions a graph into per-batch graphs by subject, `per_batch`
/// subjects at a time in sorted order.
inline std::vector<Graph> batch_by_subject(const Graph& g, std::size_t per_batch) {
  std::map<std::string_view, std::vector<const Triple*>> by_subject;
  for (const Triple& t : g.triples()) by_subject[t.subject].push_back(&t);
  std::vector<Graph> batches;
  GraphBuilder b;
  std::size_t in_batch = 0;
  for (const auto& [subject, triples] : by_subject) {
    for (const Triple* t : triples) b.add(*t);
    if (++in_batch == per_batch) {
      batches.push_back(std::move(b).freeze());
      b = GraphBuilder{};
      in_batch = 0;
    }
  }
  if (in_batch > 0) batches.push_back(std::move(b).freeze());
  return batches;
}

inline int run_query(const std::string& graph_path, const std::vector<std::string>& chunk_labels,
                     const std::string& query_path, bool stream, std::size_t batch_size,
                     const std::string& timing_path) {
  QueryAst q = parse_query(read_text_file(query_path));
  std::vector<TripleChunk> chunks;
  Graph merged;
  if (std::filesystem::is_directory(graph_path)) {
    chunks = load_chunk_dir(graph_path, chunk_labels);
    merged = merge_chunks(chunks).graph;
  } else {
    if (!chunk_labels.empty())
      throw DomainError("--chunks applies only when --graph is a directory");
    merged = parse_ntriples(read_text_file(graph_path));
  }

  ResultSet result;
  std::vector<double> batch_seconds;
  if (stream) {
    std::vector<Graph> batches;
    if (batch_size > 0) {
      batches = batch_by_subject(merged, batch_size);
    } else {
      for (const TripleChunk& c : chunks) batches.push_back(c.graph);
      if (batches.empty()) batches.push_back(merged);
    }
    std::vector<const Graph*> ptrs;
    for (const Graph& g : batches) ptrs.push_back(&g);
    StreamEvalResult r = query_detail::eval_batches(ptrs, q);
    result = std::move(r.result);
    batch_seconds = std::move(r.batch_seconds);
  } else {
    result = eval_static(merged, q);
  }

  for (std::size_t i = 0; i < result.vars.size(); ++i)
    std::cout << (i ? "\t" : "") << "?" << result.vars[i];
  std::cout << "\n";
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      std::cout << (i ? "\t" : "") << serialize_term(row[i]);
    std::cout << "\n";
  }

  if (!timing_path.empty()) {
    std::ostringstream csv;
    csv << "mode,batch,seconds\n";
    if (stream) {
      for (std::size_t i = 0; i < batch_seconds.size(); ++i)
        csv << "stream," << i << "," << format_double(batch_seconds[i]) << "\n";
      csv << "stream,total," << format_double(result.eval_seconds) << "\n";
    } else {
      csv << "static,total," << format_double(result.eval_seconds) << "\n";
    }
    write_text_file(timing_path, csv.str());
  }
  std::cerr << result.rows.size() << " rows in " << format_double(result.eval_seconds)
            << "s\n";
  return kExitOk;
}

struct WebhookSink {
  explicit WebhookSink(const std::string& url) {
    std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw DomainError("webhook URL needs a scheme: " + url);
    std::size_t host_start = scheme + 3;
    std::size_t path_start = url.find('/', host_start);
    base = url.substr(0, path_start == std::string::npos ? url.size() : path_start);
    path = path_start == std::string::npos ? "/" : url.substr(path_start);
  }

  void operator()(const Alert& a) {
    httplib::Client client(base);
    auto res = client.Post(path, serialize_alert(a), "application/json");
    if (!res) throw IoError("webhook unreachable: " + base);
    if (res->status < 200 || res->status >= 300)
      throw IoError("webhook returned status " + std::to_string(res->status));
  }

  std::string base;
  std::string path;
};

inline int run_cep(const std::string& rules_path, const std::string& events_path,
                   const std::string& alerts_path, const std::string& webhook_url, bool windowed,
                   const std::string& metrics_path) {
  if (!alerts_path.empty() && !webhook_url.empty())
    throw DomainError("--alerts and --webhook are mutually exclusive");
  RuleSet rs = load_rules_file(rules_path);
  std::vector<Event> events = read_events_jsonl_file(events_path);

  KnowledgeGraph kg = default_knowledge_graph();
  EngineOptions options;
  options.windowed = windowed;
  options.knowledge_graph = &kg;
  CepEngine engine(options);
  engine.deploy_rules(rs);
  for (const std::string& w : engine.warnings()) std::cerr << "warning: " << w << "\n";

  std::ofstream alerts_out;
  if (!alerts_path.empty()) {
    alerts_out.open(alerts_path, std::ios::binary);
    if (!alerts_out) throw IoError("cannot open " + alerts_path + " for writing");
  }
  std::optional<WebhookSink> webhook;
  if (!webhook_url.empty()) webhook.emplace(webhook_url);

  std::function<void(const Alert&)> sink = [&](const Alert& a) {
    if (alerts_out.is_open()) {
      alerts_out << serialize_alert(a) << "\n";
      if (!alerts_out) throw IoError("write failed for " + alerts_path);
    }
    if (webhook) (*webhook)(a);
  };

  try {
    EngineMetrics metrics = engine.run_stream(events, sink);
    write_text_file(metrics_path, metrics_to_csv(metrics));
    std::cout << "events=" << metrics.events_processed << " alerts=" << metrics.alerts_emitted
              << "\n";
  } catch (const RunAborted& ex) {
    write_text_file(metrics_path, metrics_to_csv(ex.partial));
    throw;
  }
  return kExitOk;
}

inline int run_bench(const std::string& spec_path, const std::string& out_path) {
  std::filesystem::path p(spec_path);
  BenchSpec spec = parse_bench_spec(read_text_file(spec_path),
                                    p.has_parent_path() ? p.parent_path().string() : ".");
  BenchReport report = run_bench_suite(spec);
  emit_report_file(report, out_path);
  std::cout << report.rows.size() << " rows -> " << out_path << "\n";
  return kExitOk;
}

}  // namespace cli_detail

/// Top-level command dispatcher; returns the process exit status.
inline int cli_dispatch(const std::vector<std::string>& args) {
  using namespace cli_detail;
  CLI::App app{"Rule-based complex event processing for air-quality streams"};
  app.require_subcommand(1);

  // ingest
  std::string in_input, in_out, in_city;
  auto* ingest = app.add_subcommand("ingest", "Convert a pollutant CSV to an event stream");
  ingest->add_option("--input", in_input, "CSV file with City/Date/pollutant columns")
      ->required();
  ingest->add_option("--out", in_out, "Output JSONL path")->required();
  ingest->add_option("--city", in_city, "Keep only this station");

  // aqi compute
  std::string aq_events, aq_breakpoints;
  bool aq_daily = false;
  auto* aqi = app.add_subcommand("aqi", "Air-quality index computation");
  aqi->require_subcommand(1);
  auto* aqi_compute = aqi->add_subcommand("compute", "Windowed AQI per event, JSONL on stdout");
  aqi_compute->add_option("--events", aq_events, "Event JSONL file")->required();
  aqi_compute->add_option("--breakpoints", aq_breakpoints, "Breakpoint CSV (default: CPCB)");
  aqi_compute->add_flag("--daily", aq_daily, "Daily mode: windows of length 1");

  // rules mine | validate
  std::string rm_data, rm_out, rv_rules, rv_breakpoints;
  auto* rules = app.add_subcommand("rules", "Rule DSL tools");
  rules->require_subcommand(1);
  auto* rules_mine = rules->add_subcommand("mine", "Mine rules from a labeled CSV");
  rules_mine->add_option("--data", rm_data, "CSV with AQI_Bucket labels")->required();
  rules_mine->add_option("--out", rm_out, "Output rule file")->required();
  auto* rules_validate = rules->add_subcommand("validate", "Check a rule file");
  rules_validate->add_option("--rules", rv_rules, "Rule file")->required();
  rules_validate->add_option("--breakpoints", rv_breakpoints, "Breakpoint CSV (default: CPCB)");

  // rdf convert | kg
  std::string rc_events, rc_out, rk_out;
  std::size_t rc_chunk_size = 0;
  std::string rc_sizes;
  auto* rdf = app.add_subcommand("rdf", "Triple conversion and knowledge graph");
  rdf->require_subcommand(1);
  auto* rdf_convert = rdf->add_subcommand("convert", "Events to chunked N-Triples files");
  rdf_convert->add_option("--events", rc_events, "Event JSONL file")->required();
  rdf_convert->add_option("--out", rc_out, "Output directory")->required();
  rdf_convert->add_option("--chunk-size", rc_chunk_size, "Tile the stream at this many events");
  rdf_convert->add_option("--sizes", rc_sizes, "Comma-separated explicit chunk sizes");
  auto* rdf_kg = rdf->add_subcommand("kg", "Write the default category knowledge graph");
  rdf_kg->add_option("--out", rk_out, "Output N-Triples path")->required();

  // query run
  std::string q_graph, q_query, q_timing, q_chunks;
  bool q_stream = false;
  std::size_t q_batch_size = 0;
  auto* query = app.add_subcommand("query", "Conjunctive queries over graphs");
  query->require_subcommand(1);
  auto* query_run = query->add_subcommand("run", "Evaluate a query file");
  query_run->add_option("--graph", q_graph, "N-Triples file or chunk directory")->required();
  query_run->add_option("--chunks", q_chunks, "Comma-separated chunk labels (directory mode)");
  query_run->add_option("--query", q_query, "Query file")->required();
  query_run->add_flag("--stream", q_stream, "Batched stream evaluation");
  query_run->add_option("--batch-size", q_batch_size, "Events per batch (stream mode)");
  query_run->add_option("--timing", q_timing, "Write per-batch timing CSV here");

  // cep run
  std::string c_rules, c_events, c_alerts, c_webhook, c_metrics;
  bool c_windowed = false;
  auto* cep = app.add_subcommand("cep", "Complex event processing engine");
  cep->require_subcommand(1);
  auto* cep_run = cep->add_subcommand("run", "Run a rule set over an event stream");
  cep_run->add_option("--rules", c_rules, "Rule file")->required();
  cep_run->add_option("--events", c_events, "Event JSONL file")->required();
  cep_run->add_option("--alerts", c_alerts, "Alert JSONL output path");
  cep_run->add_option("--webhook", c_webhook, "POST each alert to this URL");
  cep_run->add_flag("--windowed", c_windowed, "Evaluate window averages instead of raw values");
  cep_run->add_option("--metrics", c_metrics, "Metrics CSV output path")->required();

  // bench run
  std::string b_spec, b_out;
  auto* bench = app.add_subcommand("bench", "Benchmark scenarios");
  bench->require_subcommand(1);
  auto* bench_run = bench->add_subcommand("run", "Run a bench spec file");
  bench_run->add_option("--spec", b_spec, "Bench spec file")->required();
  bench_run->add_option("--out", b_out, "Report CSV path")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (ingest->parsed()) return run_ingest(in_input, in_out, in_city);
    if (aqi_compute->parsed()) return run_aqi_compute(aq_events, aq_breakpoints, aq_daily);
    if (rules_mine->parsed()) return run_rules_mine(rm_data, rm_out);
    if (rules_validate->parsed()) return run_rules_validate(rv_rules, rv_breakpoints);
    if (rdf_convert->parsed()) {
      std::vector<std::size_t> sizes;
      if (!rc_sizes.empty()) sizes = bench_detail::parse_count_list(rc_sizes, "--sizes");
      return run_rdf_convert(rc_events, rc_out, rc_chunk_size, sizes);
    }
    if (rdf_kg->parsed()) return run_rdf_kg(rk_out);
    if (query_run->parsed()) {
      std::vector<std::string> labels;
      if (!q_chunks.empty()) labels = bench_detail::parse_name_list(q_chunks);
      return run_query(q_graph, labels, q_query, q_stream, q_batch_size, q_timing);
    }
    if (cep_run->parsed())
      return run_cep(c_rules, c_events, c_alerts, c_webhook, c_windowed, c_metrics);
    if (bench_run->parsed()) return run_bench(b_spec, b_out);
    std::cerr << "no subcommand\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitDomain;
  }
}

inline int cli_dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_dispatch(args);
}

}  // namespace aircep
