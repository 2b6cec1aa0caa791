#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aircep/core.hpp"
#include "aircep/csv.hpp"

namespace aircep {

struct BreakpointRow {
  Pollutant pollutant;
  double conc_lo;
  double conc_hi;
  double aqi_lo;
  double aqi_hi;
  Category category;
};

/// Per-pollutant concentration -> AQI-range mapping. Row bounds may step
/// discretely (0-30, 31-60, ...); membership treats each row as
/// [conc_lo, next conc_lo) so the domain is gapless, while interpolation
/// uses the row's own printed bounds and clamps into its AQI range.
class BreakpointTable {
public:
  void add(BreakpointRow row) {
    auto& v = rows_[static_cast<int>(row.pollutant)];
    v.push_back(row);
    std::sort(v.begin(), v.end(),
              [](const BreakpointRow& a, const BreakpointRow& b) { return a.conc_lo < b.conc_lo; });
    validate(row.pollutant);
  }

  bool has(Pollutant p) const { return !rows_[static_cast<int>(p)].empty(); }

  std::span<const BreakpointRow> rows(Pollutant p) const { return rows_[static_cast<int>(p)]; }

  /// CPCB national-standard bands. CO is mg/m3, everything else ug/m3.
  /// The Severe rows continue the adjacent band's slope up to AQI 500.
  static BreakpointTable cpcb_default() {
    using P = Pollutant;
    using C = Category;
    BreakpointTable t;
    auto add6 = [&](P p, std::array<double, 7> edges) {
      // edges = {lo0, hi0, hi1, hi2, hi3, hi4, hi5}; lo_{k+1} follows the
      // printed tables (previous hi plus one step).
      static constexpr std::array<C, 6> cats = {C::Good, C::Satisfactory, C::ModeratelyPolluted,
                                                C::Poor, C::VeryPoor, C::Severe};
      static constexpr std::array<double, 6> alo = {0, 51, 101, 201, 301, 401};
      static constexpr std::array<double, 6> ahi = {50, 100, 200, 300, 400, 500};
      double step = (p == P::CO) ? 0.1 : 1.0;
      double lo = edges[0];
      for (int k = 0; k < 6; ++k) {
        t.rows_[static_cast<int>(p)].push_back(
            BreakpointRow{p, lo, edges[k + 1], alo[k], ahi[k], cats[k]});
        lo = edges[k + 1] + step;
      }
      t.validate(p);
      return;
    };
    add6(P::PM10, {0, 50, 100, 250, 350, 430, 510});
    add6(P::PM25, {0, 30, 60, 90, 120, 250, 380});
    add6(P::NO2, {0, 40, 80, 180, 280, 400, 520});
    add6(P::O3, {0, 50, 100, 168, 208, 748, 1288});
    add6(P::CO, {0, 1.0, 2.0, 10, 17, 34, 51});
    add6(P::SO2, {0, 40, 80, 380, 800, 1600, 2400});
    add6(P::NH3, {0, 200, 400, 800, 1200, 1800, 2400});
    return t;
  }

  /// CSV columns: pollutant, conc_lo, conc_hi, aqi_lo, aqi_hi, category.
  static BreakpointTable from_csv(std::istream& in) {
    csv::Table tab = csv::read(in);
    if (tab.header.size() < 6) throw ContractError("breakpoints csv: expected 6 columns");
    BreakpointTable t;
    for (std::size_t i = 0; i < tab.rows.size(); ++i) {
      const auto& f = tab.rows[i];
      if (f.size() < 6) throw ContractError("breakpoints csv: short row " + std::to_string(i + 1));
      auto p = parse_pollutant(trim(f[0]));
      if (!p) throw ContractError("breakpoints csv: unknown pollutant '" + f[0] + "'");
      auto lo = parse_double(trim(f[1])), hi = parse_double(trim(f[2]));
      auto alo = parse_double(trim(f[3])), ahi = parse_double(trim(f[4]));
      auto cat = parse_category(trim(f[5]));
      if (!lo || !hi || !alo || !ahi)
        throw ContractError("breakpoints csv: bad number in row " + std::to_string(i + 1));
      if (!cat) throw ContractError("breakpoints csv: unknown category '" + f[5] + "'");
      t.rows_[static_cast<int>(*p)].push_back(BreakpointRow{*p, *lo, *hi, *alo, *ahi, *cat});
    }
    for (Pollutant p : kAllPollutants) {
      auto& v = t.rows_[static_cast<int>(p)];
      std::sort(v.begin(), v.end(),
                [](const BreakpointRow& a, const BreakpointRow& b) { return a.conc_lo < b.conc_lo; });
      if (!v.empty()) t.validate(p);
    }
    return t;
  }

  static BreakpointTable from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return from_csv(in);
  }

private:
  void validate(Pollutant p) const {
    const auto& v = rows_[static_cast<int>(p)];
    for (std::size_t i = 0; i < v.size(); ++i) {
      const BreakpointRow& r = v[i];
      if (!(r.conc_lo < r.conc_hi) || !(r.aqi_lo < r.aqi_hi))
        throw ContractError(std::string("breakpoint row for ") +
                            std::string(pollutant_name(p)) + ": bounds must ascend");
      if (i > 0) {
        const BreakpointRow& q = v[i - 1];
        if (r.conc_lo < q.conc_hi || r.aqi_lo < q.aqi_hi)
          throw ContractError(std::string("breakpoint rows for ") +
                              std::string(pollutant_name(p)) + " overlap");
      }
    }
  }

  std::array<std::vector<BreakpointRow>, kPollutantCount> rows_;
};

// ---------------------------------------------------------------------------

struct SubIndex {
  Pollutant pollutant;
  double value;
};

/// Piecewise-linear interpolation of c through the pollutant's breakpoint
/// rows. Concentrations above the last row clamp to its aqi_hi.
inline SubIndex sub_index(const BreakpointTable& table, Pollutant p, double c) {
  if (!std::isfinite(c) || c < 0)
    throw DomainError("sub_index: concentration must be finite and >= 0");
  auto rows = table.rows(p);
  if (rows.empty())
    throw TableError(std::string("no breakpoint rows for ") + std::string(pollutant_name(p)));
  std::size_t k = 0;
  while (k + 1 < rows.size() && c >= rows[k + 1].conc_lo) ++k;
  const BreakpointRow& r = rows[k];
  double v = r.aqi_lo + (r.aqi_hi - r.aqi_lo) * (c - r.conc_lo) / (r.conc_hi - r.conc_lo);
  v = std::clamp(v, r.aqi_lo, r.aqi_hi);
  return SubIndex{p, v};
}

/// Category of round-half-up(aqi); aqi must lie in [0, 500].
inline Category classify_category(double aqi) {
  if (!std::isfinite(aqi) || aqi < 0 || aqi > 500)
    throw DomainError("classify_category: aqi out of [0, 500]");
  int r = static_cast<int>(std::floor(aqi + 0.5));
  for (Category c : kAllCategories) {
    auto [lo, hi] = category_range(c);
    if (r >= lo && r <= hi) return c;
  }
  return Category::Severe;  // r == 500 handled above; unreachable
}

// ---------------------------------------------------------------------------

struct WindowSpec {
  Pollutant pollutant;
  int length;       // sample count
  int min_samples;  // required present samples among the last `length`
};

/// 24-of-16 for everything except CO and O3, which average 8-hourly; daily
/// mode degenerates to the raw reading.
inline WindowSpec default_window_spec(Pollutant p, bool daily = false) {
  if (daily) return WindowSpec{p, 1, 1};
  if (p == Pollutant::CO || p == Pollutant::O3) return WindowSpec{p, 8, 6};
  return WindowSpec{p, 24, 16};
}

/// Mean over present values among the most recent spec.length samples;
/// absent when fewer than spec.min_samples are present.
inline std::optional<double> windowed_average(std::span<const std::optional<double>> series,
                                              const WindowSpec& spec) {
  if (spec.length < 1 || spec.min_samples < 1 || spec.min_samples > spec.length)
    throw ContractError("windowed_average: invalid WindowSpec");
  std::size_t take = std::min<std::size_t>(series.size(), static_cast<std::size_t>(spec.length));
  double sum = 0;
  int count = 0;
  for (std::size_t i = series.size() - take; i < series.size(); ++i) {
    if (series[i]) {
      sum += *series[i];
      ++count;
    }
  }
  if (count < spec.min_samples) return std::nullopt;
  return sum / count;
}

// ---------------------------------------------------------------------------

struct AqiResult {
  double aqi;
  Pollutant dominant;
  std::vector<SubIndex> sub_indices;
  Category category;
};

/// Worst-sub-index aggregation with the CPCB validity rules: at least three
/// pollutants present, one of them PM2.5 or PM10. Present readings for
/// pollutants without breakpoint rows count toward the three but contribute
/// no sub-index.
inline std::optional<AqiResult> compute_aqi(
    const BreakpointTable& table, const std::array<std::optional<double>, kPollutantCount>& readings) {
  int present = 0;
  for (const auto& r : readings)
    if (r) ++present;
  bool has_pm = readings[static_cast<int>(Pollutant::PM25)].has_value() ||
                readings[static_cast<int>(Pollutant::PM10)].has_value();
  if (present < 3 || !has_pm) return std::nullopt;

  AqiResult out;
  out.aqi = -1;
  for (Pollutant p : kAllPollutants) {
    const auto& r = readings[static_cast<int>(p)];
    if (!r || !table.has(p)) continue;
    SubIndex s = sub_index(table, p, *r);
    if (s.value > out.aqi) {
      out.aqi = s.value;
      out.dominant = p;
    }
    out.sub_indices.push_back(s);
  }
  if (out.sub_indices.empty()) return std::nullopt;  // custom table without PM rows
  out.category = classify_category(out.aqi);
  return out;
}

}  // namespace aircep
