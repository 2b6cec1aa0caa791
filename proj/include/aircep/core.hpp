#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aircep {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public Error {
public:
  using Error::Error;
};

/// Textual input rejected; line/col are 1-based.
class ParseError : public Error {
public:
  ParseError(std::size_t line, std::size_t col, const std::string& msg)
      : Error("line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + msg),
        line(line), col(col) {}
  std::size_t line;
  std::size_t col;
};

class DomainError : public Error {
public:
  using Error::Error;
};

/// Breakpoint table has no rows for the requested pollutant.
class TableError : public Error {
public:
  using Error::Error;
};

/// A stated precondition was violated by the caller.
class ContractError : public Error {
public:
  using Error::Error;
};

class LookupError : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Pollutants

enum class Pollutant : int { PM25, PM10, NO, NO2, NOX, NH3, CO, SO2, O3 };

inline constexpr int kPollutantCount = 9;

inline constexpr std::array<Pollutant, kPollutantCount> kAllPollutants = {
    Pollutant::PM25, Pollutant::PM10, Pollutant::NO,  Pollutant::NO2, Pollutant::NOX,
    Pollutant::NH3,  Pollutant::CO,   Pollutant::SO2, Pollutant::O3};

inline constexpr std::string_view pollutant_name(Pollutant p) {
  constexpr std::array<std::string_view, kPollutantCount> names = {
      "PM25", "PM10", "NO", "NO2", "NOX", "NH3", "CO", "SO2", "O3"};
  return names[static_cast<int>(p)];
}

/// Lowercase form used as triple predicate local name.
inline constexpr std::string_view pollutant_lower(Pollutant p) {
  constexpr std::array<std::string_view, kPollutantCount> names = {
      "pm25", "pm10", "no", "no2", "nox", "nh3", "co", "so2", "o3"};
  return names[static_cast<int>(p)];
}

inline std::string ascii_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  return out;
}

inline std::optional<Pollutant> parse_pollutant(std::string_view s) {
  std::string u = ascii_upper(s);
  for (Pollutant p : kAllPollutants)
    if (u == pollutant_name(p)) return p;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// AQI categories

enum class Category : int { Good, Satisfactory, ModeratelyPolluted, Poor, VeryPoor, Severe };

inline constexpr int kCategoryCount = 6;

inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::Good, Category::Satisfactory, Category::ModeratelyPolluted,
    Category::Poor, Category::VeryPoor,     Category::Severe};

struct CategoryRange {
  int lo;
  int hi;  // inclusive
};

inline constexpr CategoryRange category_range(Category c) {
  constexpr std::array<CategoryRange, kCategoryCount> ranges = {
      CategoryRange{0, 50},    CategoryRange{51, 100},  CategoryRange{101, 200},
      CategoryRange{201, 300}, CategoryRange{301, 400}, CategoryRange{401, 500}};
  return ranges[static_cast<int>(c)];
}

inline constexpr std::string_view category_name(Category c) {
  constexpr std::array<std::string_view, kCategoryCount> names = {
      "Good", "Satisfactory", "ModeratelyPolluted", "Poor", "VeryPoor", "Severe"};
  return names[static_cast<int>(c)];
}

/// Accepts the canonical names plus common spellings ("Moderate",
/// "Moderately Polluted", "Very Poor"), case-insensitively.
inline std::optional<Category> parse_category(std::string_view s) {
  std::string u = ascii_upper(s);
  for (Category c : kAllCategories)
    if (u == ascii_upper(category_name(c))) return c;
  if (u == "MODERATE" || u == "MODERATELY POLLUTED") return Category::ModeratelyPolluted;
  if (u == "VERY POOR") return Category::VeryPoor;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Timestamps: seconds since the Unix epoch, UTC, civil-calendar based.

struct Timestamp {
  std::int64_t secs = 0;
  auto operator<=>(const Timestamp&) const = default;
};

namespace detail {

// Howard Hinnant's days-from-civil algorithm.
inline constexpr std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline constexpr void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy + (m <= 2));
}

}  // namespace detail

inline Timestamp make_timestamp(int y, unsigned mo, unsigned d, unsigned h = 0, unsigned mi = 0,
                                unsigned s = 0) {
  return Timestamp{detail::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s};
}

/// Accepts "YYYY-MM-DD" (time defaults to 00:00:00), "YYYY-MM-DD HH:MM",
/// "YYYY-MM-DD HH:MM:SS" and the ISO-8601 'T' separator.
inline std::optional<Timestamp> parse_timestamp(std::string_view sv) {
  std::string s(sv);
  int y;
  unsigned mo, d, h = 0, mi = 0, sec = 0;
  char sep = 0;
  int n = std::sscanf(s.c_str(), "%d-%u-%u%c%u:%u:%u", &y, &mo, &d, &sep, &h, &mi, &sec);
  if (n != 3 && n != 6 && n != 7) return std::nullopt;
  if (n > 3 && sep != ' ' && sep != 'T') return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  return make_timestamp(y, mo, d, h, mi, sec);
}

inline std::string format_iso8601(Timestamp t) {
  std::int64_t days = t.secs / 86400;
  std::int64_t rem = t.secs % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y;
  unsigned mo, d;
  detail::civil_from_days(days, y, mo, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld", y, mo, d,
                static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

// ---------------------------------------------------------------------------
// Numbers: shortest round-trip formatting, strict parsing.

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Whole-string parse; rejects trailing garbage.
inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace aircep
