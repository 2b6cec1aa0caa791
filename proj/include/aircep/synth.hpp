#pragma once

#include <random>
#include <vector>

#include "aircep/core.hpp"
#include "aircep/ingest.hpp"
#include "aircep/mining.hpp"
#include "aircep/rules.hpp"

namespace aircep {

/// Upper bound of the uniform synthetic range per pollutant; spans every
/// threshold in the bundled rule set so synthetic streams exercise all
/// rules.
inline constexpr std::array<double, kPollutantCount> kSynthRange = {
    400,  // PM25
    550,  // PM10
    300,  // NO
    450,  // NO2
    300,  // NOX
    900,  // NH3
    40,   // CO
    900,  // SO2
    250,  // O3
};

/// Hourly single-station stream with uniform readings; deterministic in
/// (n, seed).
inline std::vector<Event> synth_events(std::size_t n, unsigned seed,
                                       const std::string& station = "S1") {
  std::mt19937 rng(seed);
  std::vector<Event> events;
  events.reserve(n);
  Timestamp t0 = make_timestamp(2020, 1, 1, 0, 0, 0);
  for (std::size_t i = 0; i < n; ++i) {
    Event e;
    e.seq = i;
    e.timestamp = Timestamp{t0.secs + static_cast<std::int64_t>(i) * 3600};
    e.station = station;
    for (int pi = 0; pi < kPollutantCount; ++pi) {
      std::uniform_real_distribution<double> dist(0.0, kSynthRange[pi]);
      e.readings[pi] = dist(rng);
    }
    events.push_back(std::move(e));
  }
  return events;
}

/// Rows labeled Good/Satisfactory by thresholding PM2.5, with a fraction of
/// labels flipped at random.
inline std::vector<LabeledRow> synth_threshold_rows(std::size_t n, double threshold,
                                                    double noise_fraction, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> pm25(0.0, 2.0 * threshold);
  std::uniform_real_distribution<double> other(0.0, 100.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<LabeledRow> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LabeledRow r;
    for (int pi = 0; pi < kPollutantCount; ++pi) r.readings[pi] = other(rng);
    r.readings[static_cast<int>(Pollutant::PM25)] = pm25(rng);
    bool good = r.readings[static_cast<int>(Pollutant::PM25)] <= threshold;
    if (coin(rng) < noise_fraction) good = !good;
    r.label = good ? Category::Good : Category::Satisfactory;
    rows.push_back(r);
  }
  return rows;
}

/// Satisfiable random rule: 1-3 distinct pollutants, each given a non-empty
/// [lo, hi] interval inside its synthetic range.
inline Rule synth_rule(std::mt19937& rng, const std::string& name) {
  std::uniform_int_distribution<int> n_pollutants(1, 3);
  std::uniform_int_distribution<int> pick(0, kPollutantCount - 1);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  std::uniform_int_distribution<int> cat(0, kCategoryCount - 1);
  Rule r;
  r.name = name;
  int want = n_pollutants(rng);
  std::set<int> chosen;
  while (static_cast<int>(chosen.size()) < want) chosen.insert(pick(rng));
  for (int pi : chosen) {
    double range = kSynthRange[pi];
    double lo = frac(rng) * 0.5 * range;
    double hi = lo + (0.2 + 0.5 * frac(rng)) * range;
    Pollutant p = static_cast<Pollutant>(pi);
    r.conditions.push_back(Condition{p, frac(rng) < 0.5 ? Comparator::Ge : Comparator::Gt, lo});
    r.conditions.push_back(Condition{p, frac(rng) < 0.5 ? Comparator::Le : Comparator::Lt, hi});
  }
  r.category = static_cast<Category>(cat(rng));
  return r;
}

inline RuleSet synth_rules(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  RuleSet rs;
  for (std::size_t i = 0; i < n; ++i)
    rs.rules.push_back(synth_rule(rng, "g" + std::to_string(i + 1)));
  return rs;
}

}  // namespace aircep
