#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "aircep/aqi.hpp"
#include "aircep/core.hpp"
#include "aircep/ingest.hpp"
#include "aircep/queue.hpp"
#include "aircep/rules.hpp"
#include "aircep/triples.hpp"

namespace aircep {

struct DeployedRule {
  Rule rule;
  int id = 0;  // dense, deployment order
  std::chrono::steady_clock::time_point deployed_at;
};

struct Alert {
  std::string rule_name;
  std::int64_t event_seq = 0;
  std::string station;
  Timestamp timestamp;
  Category category = Category::Good;
  std::vector<std::pair<Pollutant, double>> matched_values;  // rule's pollutants only
  std::string advisory;

  bool operator==(const Alert&) const = default;
};

struct EngineMetrics {
  std::uint64_t events_processed = 0;
  std::uint64_t alerts_emitted = 0;
  double deploy_seconds = 0;
  double process_seconds = 0;
  std::vector<std::pair<std::string, std::uint64_t>> per_rule_match_count;  // deployed order
};

/// Sink failure during run_stream; carries what completed before the abort.
struct RunAborted : Error {
  RunAborted(std::int64_t seq, EngineMetrics m, const std::string& why)
      : Error("stream aborted at event " + std::to_string(seq) + ": " + why),
        failing_seq(seq),
        partial(std::move(m)) {}
  std::int64_t failing_seq;
  EngineMetrics partial;
};

struct EngineOptions {
  bool windowed = false;  // evaluate window averages instead of raw readings
  const KnowledgeGraph* knowledge_graph = nullptr;
};

/// Deterministic per-event rule evaluation with per-(station, pollutant)
/// FIFO windows. Single consumer thread; metrics snapshots are
/// thread-safe.
class CepEngine {
public:
  explicit CepEngine(EngineOptions options = {}) : options_(options) {
    for (int pi = 0; pi < kPollutantCount; ++pi)
      specs_[pi] = default_window_spec(static_cast<Pollutant>(pi), false);
  }

  const std::vector<DeployedRule>& deployed() const { return deployed_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Rules become active in declaration order; unsatisfiable rules deploy
  /// with a warning and simply never fire.
  std::vector<DeployedRule> deploy_rules(const RuleSet& rs) {
    if (processing_started_)
      throw DomainError("rules cannot be deployed after processing has begun; "
                        "stop, redeploy, and replay instead");
    auto t0 = std::chrono::steady_clock::now();
    for (const Rule& r : rs.rules)
      if (names_.count(r.name))
        throw DomainError("rule '" + r.name + "' is already deployed");
    for (const Diagnostic& d : validate_ruleset(rs, BreakpointTable{}))
      if (d.kind == Diagnostic::Kind::Unsatisfiable)
        warnings_.push_back("rule '" + d.rule + "' is unsatisfiable and will never fire: " +
                            d.message);
    std::vector<DeployedRule> added;
    for (const Rule& r : rs.rules) {
      DeployedRule dr;
      dr.rule = r;
      dr.id = static_cast<int>(deployed_.size());
      dr.deployed_at = std::chrono::steady_clock::now();
      names_.insert(r.name);
      deployed_.push_back(dr);
      added.push_back(dr);
      std::lock_guard lock(metrics_mu_);
      metrics_.per_rule_match_count.emplace_back(r.name, 0);
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::lock_guard lock(metrics_mu_);
    metrics_.deploy_seconds += secs;
    return added;
  }

  /// Windows update first; rules then see raw or window-averaged readings.
  /// Alerts come back ordered by deployed-rule id.
  std::vector<Alert> process_event(const Event& e) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<Alert> alerts = evaluate(e);
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::lock_guard lock(metrics_mu_);
    metrics_.events_processed += 1;
    metrics_.alerts_emitted += alerts.size();
    for (const Alert& a : alerts)
      for (auto& [name, count] : metrics_.per_rule_match_count)
        if (name == a.rule_name) ++count;
    metrics_.process_seconds += secs;
    return alerts;
  }

  /// Every event once, in order; every alert to the sink in emission order.
  /// A sink throw aborts the run with partial metrics.
  EngineMetrics run_stream(std::span<const Event> events,
                           const std::function<void(const Alert&)>& sink) {
    for (const Event& e : events) {
      std::vector<Alert> alerts = process_event(e);
      for (const Alert& a : alerts) {
        try {
          if (sink) sink(a);
        } catch (const std::exception& ex) {
          throw RunAborted(e.seq, collect_metrics(), ex.what());
        }
      }
    }
    return collect_metrics();
  }

  /// Producer feeds a bounded queue; this thread consumes. Back-pressure
  /// blocks the producer when the queue is full.
  EngineMetrics run_stream_queued(std::span<const Event> events,
                                  const std::function<void(const Alert&)>& sink,
                                  std::size_t queue_capacity = 1024) {
    BoundedQueue<Event> queue(queue_capacity);
    std::thread producer([&] {
      for (const Event& e : events) queue.push(e);
      queue.close();
    });
    try {
      while (auto e = queue.pop()) {
        std::vector<Alert> alerts = process_event(*e);
        for (const Alert& a : alerts) {
          try {
            if (sink) sink(a);
          } catch (const std::exception& ex) {
            std::int64_t seq = e->seq;
            queue.close();
            producer.join();
            throw RunAborted(seq, collect_metrics(), ex.what());
          }
        }
      }
    } catch (...) {
      if (producer.joinable()) {
        queue.close();
        producer.join();
      }
      throw;
    }
    producer.join();
    return collect_metrics();
  }

  /// Consistent snapshot; stable across calls with no new traffic.
  EngineMetrics collect_metrics() const {
    std::lock_guard lock(metrics_mu_);
    return metrics_;
  }

private:
  std::vector<Alert> evaluate(const Event& e) {
    processing_started_ = true;
    if (last_seq_ && e.seq <= *last_seq_)
      throw DomainError("out-of-order event: seq " + std::to_string(e.seq) +
                        " after seq " + std::to_string(*last_seq_));
    last_seq_ = e.seq;

    auto& station_windows = windows_[e.station];
    if (station_windows.empty()) station_windows.resize(kPollutantCount);
    for (int pi = 0; pi < kPollutantCount; ++pi) {
      auto& w = station_windows[pi];
      w.push_back(e.readings[pi]);
      while (w.size() > static_cast<std::size_t>(specs_[pi].length)) w.pop_front();
    }

    std::array<std::optional<double>, kPollutantCount> values;
    if (options_.windowed) {
      for (int pi = 0; pi < kPollutantCount; ++pi) {
        const auto& w = station_windows[pi];
        if (w.size() < static_cast<std::size_t>(specs_[pi].min_samples)) continue;
        double sum = 0;
        for (double v : w) sum += v;
        values[pi] = sum / static_cast<double>(w.size());
      }
    } else {
      for (int pi = 0; pi < kPollutantCount; ++pi) values[pi] = e.readings[pi];
    }

    std::vector<Alert> alerts;
    for (const DeployedRule& dr : deployed_) {
      bool fires = true;
      for (const Condition& c : dr.rule.conditions) {
        const auto& v = values[static_cast<int>(c.pollutant)];
        if (!v || !compare(*v, c.cmp, c.threshold)) {
          fires = false;
          break;
        }
      }
      if (!fires) continue;
      Alert a;
      a.rule_name = dr.rule.name;
      a.event_seq = e.seq;
      a.station = e.station;
      a.timestamp = e.timestamp;
      a.category = dr.rule.category;
      std::set<Pollutant> seen;
      for (const Condition& c : dr.rule.conditions)
        if (seen.insert(c.pollutant).second)
          a.matched_values.emplace_back(c.pollutant, *values[static_cast<int>(c.pollutant)]);
      if (options_.knowledge_graph) {
        try {
          a.advisory = advisory_lookup(*options_.knowledge_graph, a.category);
        } catch (const LookupError& ex) {
          warnings_.push_back(std::string("advisory unavailable: ") + ex.what());
        }
      }
      alerts.push_back(std::move(a));
    }
    return alerts;
  }

  EngineOptions options_;
  std::array<WindowSpec, kPollutantCount> specs_;
  std::vector<DeployedRule> deployed_;
  std::set<std::string> names_;
  std::vector<std::string> warnings_;
  std::map<std::string, std::vector<std::deque<double>>> windows_;  // station → per pollutant
  std::optional<std::int64_t> last_seq_;
  bool processing_started_ = false;

  mutable std::mutex metrics_mu_;
  EngineMetrics metrics_;
};

}  // namespace aircep
