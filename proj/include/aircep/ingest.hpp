#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aircep/csv.hpp"
#include "aircep/core.hpp"

namespace aircep {

// ---------------------------------------------------------------------------
// Column schema: maps CSV header names to their roles.

enum class ColumnRole { City, Date, Aqi, AqiBucket, PassThrough };

struct ColumnSchema {
  // Header name -> pollutant, or -> special role. Headers in neither map
  // are carried through as pass-through columns.
  std::map<std::string, Pollutant> pollutant_columns;
  std::map<std::string, ColumnRole> special_columns;

  static ColumnSchema cpcb_default() {
    ColumnSchema s;
    s.pollutant_columns = {
        {"PM2.5", Pollutant::PM25}, {"PM10", Pollutant::PM10}, {"NO", Pollutant::NO},
        {"NO2", Pollutant::NO2},    {"NOx", Pollutant::NOX},   {"NH3", Pollutant::NH3},
        {"CO", Pollutant::CO},      {"SO2", Pollutant::SO2},   {"O3", Pollutant::O3}};
    s.special_columns = {{"City", ColumnRole::City},
                         {"Date", ColumnRole::Date},
                         {"AQI", ColumnRole::Aqi},
                         {"AQI_Bucket", ColumnRole::AqiBucket}};
    return s;
  }
};

// ---------------------------------------------------------------------------

struct RawRecord {
  std::string city;
  Timestamp date;
  std::array<std::optional<double>, kPollutantCount> readings;
  std::vector<std::pair<std::string, std::optional<double>>> extra_columns;
  std::optional<double> aqi;          // ground-truth label, never imputed
  std::optional<std::string> aqi_bucket;
};

struct RowError {
  std::size_t row;  // 1-based data row index
  std::string message;
};

struct IngestReport {
  std::size_t rows_total = 0;
  std::size_t rows_kept = 0;
  std::size_t columns_total = 0;
  std::size_t columns_mapped = 0;       // pollutant + special columns
  std::size_t columns_passthrough = 0;
  std::vector<RowError> skipped;
};

struct Dataset {
  std::vector<RawRecord> records;
  // Present only after impute_median; computed over originally-present values.
  std::optional<std::array<double, kPollutantCount>> column_medians;

  bool imputed() const { return column_medians.has_value(); }
};

struct LoadResult {
  Dataset dataset;
  IngestReport report;
};

// ---------------------------------------------------------------------------

inline LoadResult parse_dataset(std::istream& in, const ColumnSchema& schema = ColumnSchema::cpcb_default()) {
  csv::Table t = csv::read(in);
  LoadResult out;
  IngestReport& rep = out.report;

  struct Col {
    enum Kind { kPollutant, kSpecial, kPass } kind;
    Pollutant pollutant{};
    ColumnRole role{};
    std::string name;
  };
  std::vector<Col> cols;
  bool have_city = false, have_date = false;
  for (const std::string& h : t.header) {
    std::string name(trim(h));
    Col c;
    c.name = name;
    if (auto it = schema.pollutant_columns.find(name); it != schema.pollutant_columns.end()) {
      c.kind = Col::kPollutant;
      c.pollutant = it->second;
      ++rep.columns_mapped;
    } else if (auto jt = schema.special_columns.find(name); jt != schema.special_columns.end()) {
      c.kind = Col::kSpecial;
      c.role = jt->second;
      ++rep.columns_mapped;
      if (jt->second == ColumnRole::City) have_city = true;
      if (jt->second == ColumnRole::Date) have_date = true;
    } else {
      c.kind = Col::kPass;
      ++rep.columns_passthrough;
    }
    cols.push_back(std::move(c));
  }
  rep.columns_total = cols.size();
  if (!have_city || !have_date)
    throw ContractError("csv schema: header must include City and Date columns");

  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ++rep.rows_total;
    const auto& fields = t.rows[r];
    RawRecord rec;
    std::string err;
    std::size_t n = std::min(fields.size(), cols.size());
    for (std::size_t i = 0; i < n && err.empty(); ++i) {
      std::string_view f = trim(fields[i]);
      const Col& c = cols[i];
      switch (c.kind) {
        case Col::kPollutant: {
          if (f.empty()) break;  // missing
          auto v = parse_double(f);
          if (!v || !std::isfinite(*v) || *v < 0)
            err = "bad value '" + std::string(f) + "' in column " + c.name;
          else
            rec.readings[static_cast<int>(c.pollutant)] = *v;
          break;
        }
        case Col::kSpecial:
          switch (c.role) {
            case ColumnRole::City:
              rec.city = std::string(f);
              break;
            case ColumnRole::Date: {
              auto ts = parse_timestamp(f);
              if (!ts)
                err = "bad date '" + std::string(f) + "'";
              else
                rec.date = *ts;
              break;
            }
            case ColumnRole::Aqi:
              if (!f.empty()) {
                auto v = parse_double(f);
                if (!v)
                  err = "bad AQI '" + std::string(f) + "'";
                else
                  rec.aqi = *v;
              }
              break;
            case ColumnRole::AqiBucket:
              if (!f.empty()) rec.aqi_bucket = std::string(f);
              break;
            default:
              break;
          }
          break;
        case Col::kPass: {
          std::optional<double> v;
          if (!f.empty()) v = parse_double(f);  // non-numeric extras stay absent
          rec.extra_columns.emplace_back(c.name, v);
          break;
        }
      }
    }
    if (err.empty() && rec.city.empty()) err = "empty City field";
    if (!err.empty()) {
      rep.skipped.push_back(RowError{r + 1, err});
      continue;
    }
    out.dataset.records.push_back(std::move(rec));
    ++rep.rows_kept;
  }
  return out;
}

inline LoadResult parse_dataset(const std::string& path,
                                const ColumnSchema& schema = ColumnSchema::cpcb_default()) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_dataset(in, schema);
}

// ---------------------------------------------------------------------------

/// Even-count samples take the mean of the two middle order statistics.
inline double median(std::vector<double> v) {
  if (v.empty()) throw DomainError("median of empty sample");
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

/// Fills every missing pollutant cell with that column's median over the
/// originally-present values. Present cells are copied through untouched.
inline Dataset impute_median(const Dataset& d) {
  Dataset out = d;
  std::array<double, kPollutantCount> medians{};
  for (int pi = 0; pi < kPollutantCount; ++pi) {
    std::vector<double> present;
    for (const RawRecord& r : d.records)
      if (r.readings[pi]) present.push_back(*r.readings[pi]);
    if (present.empty())
      throw DomainError(std::string("imputation: column ") +
                        std::string(pollutant_name(static_cast<Pollutant>(pi))) +
                        " has no present values");
    medians[pi] = median(std::move(present));
  }
  for (RawRecord& r : out.records)
    for (int pi = 0; pi < kPollutantCount; ++pi)
      if (!r.readings[pi]) r.readings[pi] = medians[pi];
  out.column_medians = medians;
  return out;
}

// ---------------------------------------------------------------------------

/// One timestamped, fully-imputed multi-pollutant reading; the unit that
/// flows through the CEP engine.
struct Event {
  std::int64_t seq = 0;
  Timestamp timestamp;
  std::string station;
  std::array<double, kPollutantCount> readings{};

  bool operator==(const Event&) const = default;
};

/// Orders records by (station, timestamp) ascending, assigns dense seq ids.
inline std::vector<Event> to_event_stream(const Dataset& d,
                                          const std::optional<std::string>& station_filter = {}) {
  if (!d.imputed()) throw ContractError("to_event_stream requires an imputed dataset");
  std::vector<const RawRecord*> sel;
  sel.reserve(d.records.size());
  for (const RawRecord& r : d.records)
    if (!station_filter || r.city == *station_filter) sel.push_back(&r);
  std::stable_sort(sel.begin(), sel.end(), [](const RawRecord* a, const RawRecord* b) {
    if (a->city != b->city) return a->city < b->city;
    return a->date < b->date;
  });
  std::vector<Event> out;
  out.reserve(sel.size());
  std::int64_t seq = 0;
  for (const RawRecord* r : sel) {
    Event e;
    e.seq = seq++;
    e.timestamp = r->date;
    e.station = r->city;
    for (int pi = 0; pi < kPollutantCount; ++pi) e.readings[pi] = *r->readings[pi];
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace aircep
