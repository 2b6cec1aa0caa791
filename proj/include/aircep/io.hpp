#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aircep/core.hpp"
#include "aircep/engine.hpp"
#include "aircep/ingest.hpp"

namespace aircep {

/// One event per line: seq, timestamp (ISO-8601), station, nine pollutant
/// fields keyed by canonical name. Keys serialize sorted, so output is
/// byte-deterministic.
inline nlohmann::json event_to_json(const Event& e) {
  nlohmann::json j;
  j["seq"] = e.seq;
  j["timestamp"] = format_iso8601(e.timestamp);
  j["station"] = e.station;
  for (int pi = 0; pi < kPollutantCount; ++pi)
    j[std::string(pollutant_name(static_cast<Pollutant>(pi)))] = e.readings[pi];
  return j;
}

inline Event event_from_json(const nlohmann::json& j) {
  Event e;
  try {
    e.seq = j.at("seq").get<std::int64_t>();
    if (e.seq < 0) throw DomainError("negative seq");
    std::optional<Timestamp> ts = parse_timestamp(j.at("timestamp").get<std::string>());
    if (!ts) throw DomainError("unparseable timestamp");
    e.timestamp = *ts;
    e.station = j.at("station").get<std::string>();
    for (int pi = 0; pi < kPollutantCount; ++pi) {
      double v = j.at(std::string(pollutant_name(static_cast<Pollutant>(pi)))).get<double>();
      if (!std::isfinite(v) || v < 0) throw DomainError("negative or non-finite reading");
      e.readings[pi] = v;
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DomainError(std::string("malformed event object: ") + ex.what());
  }
  return e;
}

inline void write_events_jsonl(std::ostream& out, std::span<const Event> events) {
  for (const Event& e : events) out << event_to_json(e).dump() << '\n';
}

inline void write_events_jsonl_file(const std::string& path, std::span<const Event> events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_events_jsonl(out, events);
  if (!out) throw IoError("write failed for " + path);
}

inline std::vector<Event> read_events_jsonl(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = trim(line);
    if (body.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded())
      throw ParseError(line_no, 1, "malformed JSON event");
    try {
      events.push_back(event_from_json(j));
    } catch (const DomainError& ex) {
      throw ParseError(line_no, 1, ex.what());
    }
  }
  return events;
}

inline std::vector<Event> read_events_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_events_jsonl(in);
}

inline nlohmann::json alert_to_json(const Alert& a) {
  nlohmann::json j;
  j["rule"] = a.rule_name;
  j["seq"] = a.event_seq;
  j["station"] = a.station;
  j["timestamp"] = format_iso8601(a.timestamp);
  j["category"] = std::string(category_name(a.category));
  nlohmann::json values;
  for (const auto& [p, v] : a.matched_values) values[std::string(pollutant_name(p))] = v;
  j["values"] = std::move(values);
  j["advisory"] = a.advisory;
  return j;
}

inline std::string serialize_alert(const Alert& a) { return alert_to_json(a).dump(); }

/// Fixed columns, then one match-count column per rule in deployed order.
inline std::string metrics_to_csv(const EngineMetrics& m) {
  std::ostringstream out;
  out << "events_processed,alerts_emitted,deploy_seconds,process_seconds";
  for (const auto& [name, count] : m.per_rule_match_count) out << ',' << name;
  out << '\n'
      << m.events_processed << ',' << m.alerts_emitted << ',' << format_double(m.deploy_seconds)
      << ',' << format_double(m.process_seconds);
  for (const auto& [name, count] : m.per_rule_match_count) out << ',' << count;
  out << '\n';
  return out.str();
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace aircep
