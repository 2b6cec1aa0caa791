#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aircep/aqi.hpp"
#include "aircep/core.hpp"

namespace aircep {

enum class Comparator { Gt, Ge, Lt, Le };

inline constexpr std::string_view comparator_text(Comparator c) {
  switch (c) {
    case Comparator::Gt: return ">";
    case Comparator::Ge: return ">=";
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
  }
  return "?";
}

inline bool compare(double value, Comparator c, double threshold) {
  switch (c) {
    case Comparator::Gt: return value > threshold;
    case Comparator::Ge: return value >= threshold;
    case Comparator::Lt: return value < threshold;
    case Comparator::Le: return value <= threshold;
  }
  return false;
}

struct Condition {
  Pollutant pollutant;
  Comparator cmp;
  double threshold;

  bool operator==(const Condition&) const = default;
};

/// Named conjunction of threshold conditions with an output category.
struct Rule {
  std::string name;
  std::vector<Condition> conditions;
  Category category;
  std::optional<int> severity;

  bool operator==(const Rule&) const = default;
};

struct RuleSet {
  std::vector<Rule> rules;

  bool operator==(const RuleSet&) const = default;
};

inline bool rule_matches(const Rule& r, const std::array<double, kPollutantCount>& readings) {
  for (const Condition& c : r.conditions)
    if (!compare(readings[static_cast<int>(c.pollutant)], c.cmp, c.threshold)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Parser. Grammar, keywords case-insensitive, '#' comments to end of line:
//
//   ruleset  := rule*
//   rule     := RULE ident WHEN cond (AND cond)* THEN CATEGORY ident [SEVERITY int]
//   cond     := pollutant ('>' | '>=' | '<' | '<=') number

namespace rules_detail {

struct Token {
  enum Kind { Word, Number, Op, End } kind;
  std::string text;
  double number = 0;
  std::size_t line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) {
      t.kind = Token::End;
      return t;
    }
    char c = src_[pos_];
    if (c == '<' || c == '>') {
      t.kind = Token::Op;
      t.text = c;
      advance();
      if (pos_ < src_.size() && src_[pos_] == '=') {
        t.text += '=';
        advance();
      }
      return t;
    }
    if ((c >= '0' && c <= '9') || c == '.' ||
        ((c == '-' || c == '+') && pos_ + 1 < src_.size() && is_num_start(src_[pos_ + 1]))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_num_char(src_[pos_])) advance();
      std::string text(src_.substr(start, pos_ - start));
      auto v = parse_double(text);
      if (!v) throw ParseError(t.line, t.col, "malformed number '" + text + "'");
      t.kind = Token::Number;
      t.text = std::move(text);
      t.number = *v;
      return t;
    }
    if (is_word_start(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_word_char(src_[pos_])) advance();
      t.kind = Token::Word;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    throw ParseError(t.line, t.col, std::string("unexpected character '") + c + "'");
  }

private:
  static bool is_word_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_word_char(char c) { return is_word_start(c) || (c >= '0' && c <= '9'); }
  static bool is_num_start(char c) { return (c >= '0' && c <= '9') || c == '.'; }
  static bool is_num_char(char c) {
    return (c >= '0' && c <= '9') || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1, col_ = 1;
};

inline bool is_keyword(const Token& t, std::string_view kw) {
  return t.kind == Token::Word && ascii_upper(t.text) == kw;
}

}  // namespace rules_detail

inline RuleSet parse_rules(std::string_view text) {
  using rules_detail::Token;
  rules_detail::Lexer lex(text);
  RuleSet rs;
  std::set<std::string> names;
  Token t = lex.next();
  while (t.kind != Token::End) {
    if (!rules_detail::is_keyword(t, "RULE"))
      throw ParseError(t.line, t.col, "expected RULE, got '" + t.text + "'");
    Token name = lex.next();
    if (name.kind != Token::Word)
      throw ParseError(name.line, name.col, "expected rule name");
    if (!names.insert(name.text).second)
      throw ParseError(name.line, name.col, "duplicate rule name '" + name.text + "'");
    Rule rule;
    rule.name = name.text;
    t = lex.next();
    if (!rules_detail::is_keyword(t, "WHEN"))
      throw ParseError(t.line, t.col, "expected WHEN");
    // conditions
    for (;;) {
      Token pt = lex.next();
      if (pt.kind != Token::Word || !parse_pollutant(pt.text))
        throw ParseError(pt.line, pt.col,
                         "expected pollutant name, got '" + pt.text + "'");
      Pollutant p = *parse_pollutant(pt.text);
      Token op = lex.next();
      if (op.kind != Token::Op)
        throw ParseError(op.line, op.col, "expected comparator");
      Comparator cmp;
      if (op.text == ">") cmp = Comparator::Gt;
      else if (op.text == ">=") cmp = Comparator::Ge;
      else if (op.text == "<") cmp = Comparator::Lt;
      else cmp = Comparator::Le;
      Token num = lex.next();
      if (num.kind != Token::Number)
        throw ParseError(num.line, num.col, "expected threshold number");
      if (!std::isfinite(num.number) || num.number < 0)
        throw ParseError(num.line, num.col, "threshold must be finite and >= 0");
      rule.conditions.push_back(Condition{p, cmp, num.number});
      t = lex.next();
      if (rules_detail::is_keyword(t, "AND")) continue;
      break;
    }
    if (!rules_detail::is_keyword(t, "THEN"))
      throw ParseError(t.line, t.col, "expected AND or THEN");
    t = lex.next();
    if (!rules_detail::is_keyword(t, "CATEGORY"))
      throw ParseError(t.line, t.col, "expected CATEGORY");
    Token cat = lex.next();
    if (cat.kind != Token::Word || !parse_category(cat.text))
      throw ParseError(cat.line, cat.col, "unknown category '" + cat.text + "'");
    rule.category = *parse_category(cat.text);
    t = lex.next();
    if (rules_detail::is_keyword(t, "SEVERITY")) {
      Token sev = lex.next();
      if (sev.kind != Token::Number || sev.number != std::floor(sev.number))
        throw ParseError(sev.line, sev.col, "expected integer severity");
      rule.severity = static_cast<int>(sev.number);
      t = lex.next();
    }
    rs.rules.push_back(std::move(rule));
  }
  return rs;
}

/// Canonical text form; parse_rules(print_rules(rs)) == rs.
inline std::string print_rules(const RuleSet& rs) {
  std::string out;
  for (const Rule& r : rs.rules) {
    out += "RULE " + r.name + " WHEN ";
    for (std::size_t i = 0; i < r.conditions.size(); ++i) {
      const Condition& c = r.conditions[i];
      if (i) out += " AND ";
      out += std::string(pollutant_name(c.pollutant)) + " " +
             std::string(comparator_text(c.cmp)) + " " + format_double(c.threshold);
    }
    out += " THEN CATEGORY " + std::string(category_name(r.category));
    if (r.severity) out += " SEVERITY " + std::to_string(*r.severity);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ruleset validation against a breakpoint table.

struct Diagnostic {
  enum class Kind { Unsatisfiable, CrossBand, OverlapConflict };
  enum class Severity { Error, Warning };
  Kind kind;
  Severity severity;
  std::string rule;  // "a & b" for pairwise diagnostics
  std::string message;
};

namespace rules_detail {

struct Interval {
  double lo = 0;  // concentrations are non-negative
  bool lo_strict = false;
  double hi = std::numeric_limits<double>::infinity();
  bool hi_strict = false;

  void apply(const Condition& c) {
    switch (c.cmp) {
      case Comparator::Ge:
        if (c.threshold > lo) {
          lo = c.threshold;
          lo_strict = false;
        }
        break;
      case Comparator::Gt:
        if (c.threshold > lo || (c.threshold == lo && !lo_strict)) {
          lo = c.threshold;
          lo_strict = true;
        }
        break;
      case Comparator::Le:
        if (c.threshold < hi) {
          hi = c.threshold;
          hi_strict = false;
        }
        break;
      case Comparator::Lt:
        if (c.threshold < hi || (c.threshold == hi && !hi_strict)) {
          hi = c.threshold;
          hi_strict = true;
        }
        break;
    }
  }

  bool empty() const {
    if (lo > hi) return true;
    if (lo == hi && (lo_strict || hi_strict)) return true;
    return false;
  }

  Interval intersect(const Interval& o) const {
    Interval r = *this;
    if (o.lo > r.lo) {
      r.lo = o.lo;
      r.lo_strict = o.lo_strict;
    } else if (o.lo == r.lo) {
      r.lo_strict = r.lo_strict || o.lo_strict;
    }
    if (o.hi < r.hi) {
      r.hi = o.hi;
      r.hi_strict = o.hi_strict;
    } else if (o.hi == r.hi) {
      r.hi_strict = r.hi_strict || o.hi_strict;
    }
    return r;
  }
};

/// Per-pollutant effective bounds of a rule's conjunction; nullopt where
/// the rule leaves the pollutant unconstrained.
inline std::array<std::optional<Interval>, kPollutantCount> rule_box(const Rule& r) {
  std::array<std::optional<Interval>, kPollutantCount> box;
  for (const Condition& c : r.conditions) {
    auto& iv = box[static_cast<int>(c.pollutant)];
    if (!iv) iv = Interval{};
    iv->apply(c);
  }
  return box;
}

}  // namespace rules_detail

/// Reports unsatisfiable rules, rules whose bounds sit wholly inside a
/// breakpoint band of a different category, and overlapping rules with
/// conflicting categories.
inline std::vector<Diagnostic> validate_ruleset(const RuleSet& rs, const BreakpointTable& table) {
  using rules_detail::Interval;
  std::vector<Diagnostic> out;
  std::vector<std::array<std::optional<Interval>, kPollutantCount>> boxes;
  std::vector<bool> unsat(rs.rules.size(), false);
  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    const Rule& r = rs.rules[i];
    boxes.push_back(rules_detail::rule_box(r));
    for (int pi = 0; pi < kPollutantCount; ++pi) {
      const auto& iv = boxes.back()[pi];
      if (iv && iv->empty()) {
        unsat[i] = true;
        out.push_back(Diagnostic{Diagnostic::Kind::Unsatisfiable, Diagnostic::Severity::Error,
                                 r.name,
                                 "conditions on " +
                                     std::string(pollutant_name(static_cast<Pollutant>(pi))) +
                                     " are contradictory"});
        break;
      }
    }
    if (unsat[i]) continue;
    // cross-band containment
    for (int pi = 0; pi < kPollutantCount; ++pi) {
      const auto& iv = boxes.back()[pi];
      Pollutant p = static_cast<Pollutant>(pi);
      if (!iv || !table.has(p)) continue;
      auto rows = table.rows(p);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        // a row covers [conc_lo, next conc_lo); the last row is closed at conc_hi
        double lo = rows[k].conc_lo;
        double hi = (k + 1 < rows.size()) ? rows[k + 1].conc_lo : rows[k].conc_hi;
        bool hi_open = k + 1 < rows.size();
        bool contained = iv->lo >= lo && (hi_open ? (iv->hi < hi || (iv->hi == hi && iv->hi_strict))
                                                  : iv->hi <= hi);
        if (contained) {
          if (rows[k].category != rs.rules[i].category)
            out.push_back(Diagnostic{
                Diagnostic::Kind::CrossBand, Diagnostic::Severity::Warning, rs.rules[i].name,
                std::string(pollutant_name(p)) + " bounds lie inside the " +
                    std::string(category_name(rows[k].category)) + " band but the rule asserts " +
                    std::string(category_name(rs.rules[i].category))});
          break;
        }
      }
    }
  }
  // overlapping rules with conflicting categories
  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    if (unsat[i]) continue;
    for (std::size_t j = i + 1; j < rs.rules.size(); ++j) {
      if (unsat[j] || rs.rules[i].category == rs.rules[j].category) continue;
      bool overlap = true;
      for (int pi = 0; pi < kPollutantCount && overlap; ++pi) {
        const auto &a = boxes[i][pi], &b = boxes[j][pi];
        if (a && b && a->intersect(*b).empty()) overlap = false;
      }
      if (overlap)
        out.push_back(Diagnostic{Diagnostic::Kind::OverlapConflict, Diagnostic::Severity::Warning,
                                 rs.rules[i].name + " & " + rs.rules[j].name,
                                 "overlapping rules assert " +
                                     std::string(category_name(rs.rules[i].category)) + " vs " +
                                     std::string(category_name(rs.rules[j].category))});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Bundled five-rule sample set over CPCB-style thresholds (the contradictory
/// third rule replaced with a satisfiable upper bound).
inline RuleSet sample_rules() {
  return parse_rules(
      "RULE r1 WHEN PM25 >= 55.5 AND PM25 <= 150.4 AND O3 >= 51 AND O3 <= 75 "
      "THEN CATEGORY ModeratelyPolluted\n"
      "RULE r2 WHEN PM10 >= 255 AND PM10 <= 354 AND O3 >= 70 AND O3 <= 101 AND NOX >= 6 "
      "THEN CATEGORY Poor\n"
      "RULE r3 WHEN PM25 >= 250.5 AND PM25 <= 350.4 AND SO2 > 20 AND NO2 > 60 AND NO2 < 140 "
      "THEN CATEGORY Severe\n"
      "RULE r4 WHEN PM10 >= 325 AND PM10 <= 600 AND SO2 > 20 AND NOX > 60 AND NOX < 160 "
      "AND NO > 100 AND NH3 < 100 THEN CATEGORY Severe\n"
      "RULE r5 WHEN PM25 >= 0 AND PM25 <= 12 AND NO2 >= 8 AND NO2 <= 18 AND NH3 >= 10 "
      "AND NH3 < 17 THEN CATEGORY Good\n");
}

}  // namespace aircep
