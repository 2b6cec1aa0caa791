#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "aircep/core.hpp"
#include "aircep/rules.hpp"
#include "aircep/triples.hpp"

namespace aircep {

enum class CmpOp { Gt, Ge, Lt, Le, Eq };

inline constexpr std::string_view cmp_op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Eq: return "=";
  }
  return "?";
}

inline constexpr CmpOp to_cmp_op(Comparator c) {
  switch (c) {
    case Comparator::Gt: return CmpOp::Gt;
    case Comparator::Ge: return CmpOp::Ge;
    case Comparator::Lt: return CmpOp::Lt;
    case Comparator::Le: return CmpOp::Le;
  }
  return CmpOp::Eq;
}

inline bool apply_cmp(double value, CmpOp op, double rhs) {
  switch (op) {
    case CmpOp::Gt: return value > rhs;
    case CmpOp::Ge: return value >= rhs;
    case CmpOp::Lt: return value < rhs;
    case CmpOp::Le: return value <= rhs;
    case CmpOp::Eq: return value == rhs;
  }
  return false;
}

/// Boolean tree over numeric comparisons of bound variables.
struct FilterExpr {
  enum class Kind { And, Or, Cmp };
  Kind kind = Kind::Cmp;
  std::vector<FilterExpr> children;  // And, Or: >= 2 children
  std::string var;                   // Cmp
  CmpOp op = CmpOp::Eq;              // Cmp
  double value = 0;                  // Cmp

  static FilterExpr cmp(std::string v, CmpOp o, double x) {
    FilterExpr e;
    e.kind = Kind::Cmp;
    e.var = std::move(v);
    e.op = o;
    e.value = x;
    return e;
  }
  static FilterExpr conjunction(std::vector<FilterExpr> cs) {
    if (cs.size() == 1) return std::move(cs[0]);
    FilterExpr e;
    e.kind = Kind::And;
    e.children = std::move(cs);
    return e;
  }

  bool operator==(const FilterExpr&) const = default;
};

/// Variable or concrete term; concrete subjects are always IRIs.
struct VarOrTerm {
  bool is_var = false;
  std::string var;
  Term term;

  static VarOrTerm variable(std::string name) {
    VarOrTerm v;
    v.is_var = true;
    v.var = std::move(name);
    return v;
  }
  static VarOrTerm concrete(Term t) {
    VarOrTerm v;
    v.term = std::move(t);
    return v;
  }

  bool operator==(const VarOrTerm&) const = default;
};

struct TriplePattern {
  VarOrTerm subject;
  std::string predicate;  // always concrete
  VarOrTerm object;

  bool operator==(const TriplePattern&) const = default;
};

struct QueryAst {
  std::vector<std::string> select_vars;
  std::vector<TriplePattern> patterns;
  std::optional<FilterExpr> filter;

  bool operator==(const QueryAst&) const = default;
};

/// Rows are term tuples aligned with `vars`; sorted by serialized binding,
/// duplicates removed.
struct ResultSet {
  std::vector<std::string> vars;
  std::vector<std::vector<Term>> rows;
  double eval_seconds = 0;
};

struct StreamEvalResult {
  ResultSet result;
  std::vector<double> batch_seconds;
};

// ---------------------------------------------------------------------------
// Parser.

namespace query_detail {

struct Token {
  enum Kind {
    Word, Var, Iri, Pname, Number, String, LBrace, RBrace, LParen, RParen,
    Dot, AndAnd, OrOr, HatHat, Op, End
  } kind = End;
  std::string text;    // word/var name (no '?'), IRI body, pname, op text, literal body
  std::string suffix;  // Pname: local part after ':'
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
    switch (c) {
      case '{': advance(); t.kind = Token::LBrace; return t;
      case '}': advance(); t.kind = Token::RBrace; return t;
      case '(': advance(); t.kind = Token::LParen; return t;
      case ')': advance(); t.kind = Token::RParen; return t;
      default: break;
    }
    if (c == '&' || c == '|' || c == '^') {
      advance();
      if (pos_ >= src_.size() || src_[pos_] != c)
        throw ParseError(t.line, t.col, std::string("expected '") + c + c + "'");
      advance();
      t.kind = (c == '&') ? Token::AndAnd : (c == '|') ? Token::OrOr : Token::HatHat;
      return t;
    }
    if (c == '>' || c == '<' || c == '=') {
      if (c == '<' && pos_ + 1 < src_.size() && !is_op_tail(src_[pos_ + 1]) &&
          src_[pos_ + 1] != ' ' && looks_like_iri()) {
        return lex_iri(t);
      }
      advance();
      t.kind = Token::Op;
      t.text = c;
      if (c != '=' && pos_ < src_.size() && src_[pos_] == '=') {
        t.text += '=';
        advance();
      }
      return t;
    }
    if (c == '?') {
      advance();
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_word_char(src_[pos_])) advance();
      if (pos_ == start) throw ParseError(t.line, t.col, "empty variable name");
      t.kind = Token::Var;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    if (c == '"') {
      advance();
      std::string body;
      while (pos_ < src_.size() && src_[pos_] != '"') {
        if (src_[pos_] == '\\') {
          advance();
          if (pos_ >= src_.size()) break;
          switch (src_[pos_]) {
            case 'n': body += '\n'; break;
            case 'r': body += '\r'; break;
            case 't': body += '\t'; break;
            case '"': body += '"'; break;
            case '\\': body += '\\'; break;
            default: throw ParseError(line_, col_, "unknown escape in string");
          }
          advance();
        } else {
          body += src_[pos_];
          advance();
        }
      }
      if (pos_ >= src_.size()) throw ParseError(t.line, t.col, "unterminated string");
      advance();
      t.kind = Token::String;
      t.text = std::move(body);
      return t;
    }
    if ((c >= '0' && c <= '9') ||
        (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1])) ||
        ((c == '-' || c == '+') && pos_ + 1 < src_.size() &&
         (is_digit(src_[pos_ + 1]) || src_[pos_ + 1] == '.'))) {
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
    if (c == '.') {
      advance();
      t.kind = Token::Dot;
      return t;
    }
    if (is_word_start(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_word_char(src_[pos_])) advance();
      std::string word(src_.substr(start, pos_ - start));
      if (pos_ < src_.size() && src_[pos_] == ':') {
        advance();
        std::size_t ls = pos_;
        while (pos_ < src_.size() && is_word_char(src_[pos_])) advance();
        t.kind = Token::Pname;
        t.text = std::move(word);
        t.suffix = std::string(src_.substr(ls, pos_ - ls));
        return t;
      }
      t.kind = Token::Word;
      t.text = std::move(word);
      return t;
    }
    throw ParseError(t.line, t.col, std::string("unexpected character '") + c + "'");
  }

private:
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_word_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_word_char(char c) { return is_word_start(c) || is_digit(c); }
  static bool is_num_char(char c) {
    return is_digit(c) || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-';
  }
  static bool is_op_tail(char c) { return c == '='; }

  bool looks_like_iri() const {
    std::size_t i = pos_ + 1;
    while (i < src_.size() && src_[i] != '>' && src_[i] != '\n' && src_[i] != ' ') ++i;
    return i < src_.size() && src_[i] == '>';
  }

  Token lex_iri(Token t) {
    advance();  // '<'
    std::size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] != '>') {
      if (src_[pos_] == '\n' || src_[pos_] == ' ')
        throw ParseError(t.line, t.col, "whitespace inside IRI");
      advance();
    }
    if (pos_ >= src_.size()) throw ParseError(t.line, t.col, "unterminated IRI");
    t.kind = Token::Iri;
    t.text = std::string(src_.substr(start, pos_ - start));
    advance();  // '>'
    if (t.text.empty()) throw ParseError(t.line, t.col, "empty IRI");
    return t;
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

class Parser {
public:
  explicit Parser(std::string_view src) : lex_(src) {
    prefixes_["aq"] = std::string(kAqPrefix);
    prefixes_["ex"] = std::string(kExPrefix);
    prefixes_["xsd"] = std::string(kXsdPrefix);
    advance();
  }

  QueryAst parse() {
    while (is_keyword(tok_, "PREFIX")) parse_prefix();
    expect_keyword("SELECT");
    QueryAst q;
    while (tok_.kind == Token::Var) {
      q.select_vars.push_back(tok_.text);
      advance();
    }
    if (q.select_vars.empty()) throw err("expected at least one ?variable after SELECT");
    expect_keyword("WHERE");
    if (tok_.kind != Token::LBrace) throw err("expected '{'");
    advance();
    bool saw_filter = false;
    while (tok_.kind != Token::RBrace) {
      if (tok_.kind == Token::End) throw err("unterminated WHERE block");
      if (is_keyword(tok_, "FILTER")) {
        if (saw_filter) throw err("multiple FILTER clauses");
        saw_filter = true;
        advance();
        if (tok_.kind != Token::LParen) throw err("expected '(' after FILTER");
        advance();
        q.filter = parse_or();
        if (tok_.kind != Token::RParen) throw err("expected ')' to close FILTER");
        advance();
      } else {
        if (saw_filter) throw err("patterns must precede FILTER");
        q.patterns.push_back(parse_pattern());
      }
      if (tok_.kind == Token::Dot) advance();
    }
    advance();
    if (tok_.kind != Token::End) throw err("trailing input after query");
    validate(q);
    return q;
  }

private:
  void parse_prefix() {
    advance();
    if (tok_.kind != Token::Pname || !tok_.suffix.empty())
      throw err("expected 'name:' after PREFIX");
    std::string name = tok_.text;
    advance();
    if (tok_.kind != Token::Iri) throw err("expected <IRI> in PREFIX declaration");
    prefixes_[name] = tok_.text;
    advance();
  }

  std::string expand(const Token& t) {
    auto it = prefixes_.find(t.text);
    if (it == prefixes_.end())
      throw ParseError(t.line, t.col, "unknown prefix '" + t.text + ":'");
    return it->second + t.suffix;
  }

  TriplePattern parse_pattern() {
    TriplePattern p;
    if (tok_.kind == Token::Var) {
      p.subject = VarOrTerm::variable(tok_.text);
    } else if (tok_.kind == Token::Iri) {
      p.subject = VarOrTerm::concrete(Term::iri(tok_.text));
    } else if (tok_.kind == Token::Pname) {
      p.subject = VarOrTerm::concrete(Term::iri(expand(tok_)));
    } else {
      throw err("expected pattern subject (?var or IRI)");
    }
    advance();
    if (tok_.kind == Token::Iri) {
      p.predicate = tok_.text;
    } else if (tok_.kind == Token::Pname) {
      p.predicate = expand(tok_);
    } else {
      throw err("expected concrete predicate IRI");
    }
    advance();
    if (tok_.kind == Token::Var) {
      p.object = VarOrTerm::variable(tok_.text);
      advance();
    } else if (tok_.kind == Token::Iri) {
      p.object = VarOrTerm::concrete(Term::iri(tok_.text));
      advance();
    } else if (tok_.kind == Token::Pname) {
      p.object = VarOrTerm::concrete(Term::iri(expand(tok_)));
      advance();
    } else if (tok_.kind == Token::Number) {
      p.object = VarOrTerm::concrete(Term::literal(tok_.text, Datatype::Decimal));
      advance();
    } else if (tok_.kind == Token::String) {
      std::string body = tok_.text;
      advance();
      p.object = VarOrTerm::concrete(parse_literal_suffix(std::move(body)));
    } else {
      throw err("expected pattern object (?var, IRI, or literal)");
    }
    return p;
  }

  Term parse_literal_suffix(std::string body) {
    if (tok_.kind != Token::HatHat) return Term::string(std::move(body));
    advance();
    Token dt = tok_;
    std::string iri;
    if (dt.kind == Token::Iri) iri = dt.text;
    else if (dt.kind == Token::Pname) iri = expand(dt);
    else throw err("expected datatype IRI after ^^");
    advance();
    Datatype d;
    if (iri == datatype_iri(Datatype::Decimal)) d = Datatype::Decimal;
    else if (iri == datatype_iri(Datatype::DateTime)) d = Datatype::DateTime;
    else if (iri == datatype_iri(Datatype::String)) d = Datatype::String;
    else throw ParseError(dt.line, dt.col, "unsupported datatype <" + iri + ">");
    if (d == Datatype::Decimal && !parse_double(body))
      throw ParseError(dt.line, dt.col, "malformed decimal literal");
    return Term::literal(std::move(body), d);
  }

  FilterExpr parse_or() {
    std::vector<FilterExpr> parts;
    parts.push_back(parse_and());
    while (tok_.kind == Token::OrOr) {
      advance();
      parts.push_back(parse_and());
    }
    if (parts.size() == 1) return std::move(parts[0]);
    FilterExpr e;
    e.kind = FilterExpr::Kind::Or;
    e.children = std::move(parts);
    return e;
  }

  FilterExpr parse_and() {
    std::vector<FilterExpr> parts;
    parts.push_back(parse_primary());
    while (tok_.kind == Token::AndAnd) {
      advance();
      parts.push_back(parse_primary());
    }
    if (parts.size() == 1) return std::move(parts[0]);
    FilterExpr e;
    e.kind = FilterExpr::Kind::And;
    e.children = std::move(parts);
    return e;
  }

  FilterExpr parse_primary() {
    if (tok_.kind == Token::LParen) {
      advance();
      FilterExpr e = parse_or();
      if (tok_.kind != Token::RParen) throw err("expected ')'");
      advance();
      return e;
    }
    if (tok_.kind != Token::Var) throw err("expected ?variable in comparison");
    std::string var = tok_.text;
    advance();
    if (tok_.kind != Token::Op) throw err("expected comparator");
    CmpOp op;
    if (tok_.text == ">") op = CmpOp::Gt;
    else if (tok_.text == ">=") op = CmpOp::Ge;
    else if (tok_.text == "<") op = CmpOp::Lt;
    else if (tok_.text == "<=") op = CmpOp::Le;
    else if (tok_.text == "=") op = CmpOp::Eq;
    else throw err("unknown comparator '" + tok_.text + "'");
    advance();
    if (tok_.kind != Token::Number) throw err("expected numeric constant");
    double v = tok_.number;
    advance();
    return FilterExpr::cmp(std::move(var), op, v);
  }

  static void collect_vars(const FilterExpr& e, std::set<std::string>& out) {
    if (e.kind == FilterExpr::Kind::Cmp) {
      out.insert(e.var);
      return;
    }
    for (const FilterExpr& c : e.children) collect_vars(c, out);
  }

  void validate(const QueryAst& q) {
    if (q.patterns.empty()) throw err("query needs at least one pattern");
    std::set<std::string> pattern_vars;
    for (const TriplePattern& p : q.patterns) {
      if (p.subject.is_var) pattern_vars.insert(p.subject.var);
      if (p.object.is_var) pattern_vars.insert(p.object.var);
    }
    for (const std::string& v : q.select_vars)
      if (!pattern_vars.count(v))
        throw err("selected variable ?" + v + " is not bound by any pattern");
    if (q.filter) {
      std::set<std::string> fvars;
      collect_vars(*q.filter, fvars);
      for (const std::string& v : fvars)
        if (!pattern_vars.count(v))
          throw err("filter variable ?" + v + " is not bound by any pattern");
    }
    // connectivity over shared variables
    std::size_t n = q.patterns.size();
    std::vector<bool> reached(n, false);
    std::vector<std::size_t> work{0};
    reached[0] = true;
    auto shares = [&](std::size_t a, std::size_t b) {
      auto vars_of = [&](std::size_t i) {
        std::set<std::string> s;
        if (q.patterns[i].subject.is_var) s.insert(q.patterns[i].subject.var);
        if (q.patterns[i].object.is_var) s.insert(q.patterns[i].object.var);
        return s;
      };
      auto sa = vars_of(a);
      for (const std::string& v : vars_of(b))
        if (sa.count(v)) return true;
      return false;
    };
    while (!work.empty()) {
      std::size_t i = work.back();
      work.pop_back();
      for (std::size_t j = 0; j < n; ++j)
        if (!reached[j] && shares(i, j)) {
          reached[j] = true;
          work.push_back(j);
        }
    }
    for (std::size_t j = 0; j < n; ++j)
      if (!reached[j]) throw err("pattern join graph is disconnected");
  }

  void expect_keyword(std::string_view kw) {
    if (!is_keyword(tok_, kw)) throw err("expected " + std::string(kw));
    advance();
  }

  ParseError err(const std::string& msg) const { return ParseError(tok_.line, tok_.col, msg); }

  void advance() { tok_ = lex_.next(); }

  Lexer lex_;
  Token tok_;
  std::map<std::string, std::string> prefixes_;
};

}  // namespace query_detail

inline QueryAst parse_query(std::string_view text) {
  query_detail::Parser p(text);
  return p.parse();
}

// ---------------------------------------------------------------------------
// Printing. Full IRIs; parse_query(print_query(q)) == q.

namespace query_detail {

inline std::string print_term_sparql(const Term& t) {
  if (t.kind == Term::Kind::Iri) return "<" + t.text + ">";
  if (t.datatype == Datatype::Decimal) return t.text;
  if (t.datatype == Datatype::String) {
    std::string out = "\"";
    triples_detail::escape_into(t.text, out);
    out += "\"";
    return out;
  }
  std::string out = "\"";
  triples_detail::escape_into(t.text, out);
  out += "\"^^<";
  out += datatype_iri(t.datatype);
  out += ">";
  return out;
}

inline std::string print_var_or_term(const VarOrTerm& v) {
  if (v.is_var) return "?" + v.var;
  return print_term_sparql(v.term);
}

inline void print_filter(const FilterExpr& e, std::string& out, bool parenthesize) {
  if (e.kind == FilterExpr::Kind::Cmp) {
    out += "?" + e.var + " " + std::string(cmp_op_text(e.op)) + " " + format_double(e.value);
    return;
  }
  if (parenthesize) out += "(";
  std::string_view sep = (e.kind == FilterExpr::Kind::And) ? " && " : " || ";
  for (std::size_t i = 0; i < e.children.size(); ++i) {
    if (i) out += sep;
    print_filter(e.children[i], out, true);
  }
  if (parenthesize) out += ")";
}

}  // namespace query_detail

inline std::string print_query(const QueryAst& q) {
  std::string out = "SELECT";
  for (const std::string& v : q.select_vars) out += " ?" + v;
  out += " WHERE {\n";
  for (const TriplePattern& p : q.patterns) {
    out += "  " + query_detail::print_var_or_term(p.subject) + " <" + p.predicate + "> " +
           query_detail::print_var_or_term(p.object) + " .\n";
  }
  if (q.filter) {
    out += "  FILTER(";
    query_detail::print_filter(*q.filter, out, false);
    out += ")\n";
  }
  out += "}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace query_detail {

inline std::string term_key(const Term& t) {
  std::string k;
  k += static_cast<char>(t.kind == Term::Kind::Iri ? 'I' : ('0' + static_cast<int>(t.datatype)));
  k += t.text;
  return k;
}

struct EvalContext {
  std::vector<std::string> vars;  // slot order
  std::unordered_map<std::string, std::size_t> slot_of;

  std::size_t slot(const std::string& v) {
    auto it = slot_of.find(v);
    if (it != slot_of.end()) return it->second;
    std::size_t s = vars.size();
    vars.push_back(v);
    slot_of.emplace(v, s);
    return s;
  }
};

inline bool filter_matches(const FilterExpr& e, const std::vector<Term>& row,
                           const std::unordered_map<std::string, std::size_t>& slot_of) {
  switch (e.kind) {
    case FilterExpr::Kind::And:
      for (const FilterExpr& c : e.children)
        if (!filter_matches(c, row, slot_of)) return false;
      return true;
    case FilterExpr::Kind::Or:
      for (const FilterExpr& c : e.children)
        if (filter_matches(c, row, slot_of)) return true;
      return false;
    case FilterExpr::Kind::Cmp: {
      auto it = slot_of.find(e.var);
      if (it == slot_of.end()) return false;
      const Term& t = row[it->second];
      if (t.kind != Term::Kind::Literal || t.datatype != Datatype::Decimal) return false;
      auto v = parse_double(t.text);
      if (!v) return false;
      return apply_cmp(*v, e.op, e.value);
    }
  }
  return false;
}

inline ResultSet eval_static_inner(const Graph& g, const QueryAst& q) {
  EvalContext ctx;
  for (const TriplePattern& p : q.patterns) {
    if (p.subject.is_var) ctx.slot(p.subject.var);
    if (p.object.is_var) ctx.slot(p.object.var);
  }
  const std::size_t nvars = ctx.vars.size();

  std::vector<std::vector<Term>> rows;
  std::vector<bool> bound(nvars, false);
  std::vector<bool> used(q.patterns.size(), false);
  bool first = true;

  for (std::size_t step = 0; step < q.patterns.size(); ++step) {
    // next pattern: prefer ones joined to bound variables, then lowest cardinality
    std::size_t pick = q.patterns.size();
    bool pick_joined = false;
    std::size_t pick_card = 0;
    for (std::size_t i = 0; i < q.patterns.size(); ++i) {
      if (used[i]) continue;
      const TriplePattern& p = q.patterns[i];
      bool joined = false;
      if (p.subject.is_var && bound[ctx.slot_of[p.subject.var]]) joined = true;
      if (p.object.is_var && bound[ctx.slot_of[p.object.var]]) joined = true;
      bool has_var = p.subject.is_var || p.object.is_var;
      if (!has_var) joined = true;  // concrete existence check can run any time
      std::size_t card = g.predicate_cardinality(p.predicate);
      bool better;
      if (pick == q.patterns.size()) better = true;
      else if (!first && joined != pick_joined) better = joined;
      else better = card < pick_card;
      if (better) {
        pick = i;
        pick_joined = joined;
        pick_card = card;
      }
    }
    const TriplePattern& p = q.patterns[pick];
    used[pick] = true;

    auto postings = g.with_predicate(p.predicate);
    auto matches_concrete = [&](const Triple& t) {
      if (!p.subject.is_var && t.subject != p.subject.term.text) return false;
      if (!p.object.is_var && !(t.object == p.object.term)) return false;
      return true;
    };

    if (first) {
      first = false;
      std::vector<std::vector<Term>> next;
      for (std::uint32_t i : postings) {
        const Triple& t = g.triples()[i];
        if (!matches_concrete(t)) continue;
        std::vector<Term> row(nvars);
        if (p.subject.is_var) row[ctx.slot_of[p.subject.var]] = Term::iri(t.subject);
        if (p.object.is_var) row[ctx.slot_of[p.object.var]] = t.object;
        next.push_back(std::move(row));
      }
      if (p.subject.is_var) bound[ctx.slot_of[p.subject.var]] = true;
      if (p.object.is_var) bound[ctx.slot_of[p.object.var]] = true;
      rows = std::move(next);
      if (!p.subject.is_var && !p.object.is_var && rows.empty()) return {};
      continue;
    }

    bool subj_join = p.subject.is_var && bound[ctx.slot_of[p.subject.var]];
    bool obj_join = p.object.is_var && bound[ctx.slot_of[p.object.var]];
    bool subj_new = p.subject.is_var && !subj_join;
    bool obj_new = p.object.is_var && !obj_join;

    if (!subj_join && !obj_join) {
      // no shared variable: cartesian product (connected queries avoid this
      // except for fully concrete existence checks)
      bool exists = false;
      std::vector<std::vector<Term>> extension;
      for (std::uint32_t i : postings) {
        const Triple& t = g.triples()[i];
        if (!matches_concrete(t)) continue;
        exists = true;
        if (!subj_new && !obj_new) break;
        std::vector<Term> ext(nvars);
        if (subj_new) ext[ctx.slot_of[p.subject.var]] = Term::iri(t.subject);
        if (obj_new) ext[ctx.slot_of[p.object.var]] = t.object;
        extension.push_back(std::move(ext));
      }
      if (!exists) return {};
      if (subj_new || obj_new) {
        std::vector<std::vector<Term>> next;
        for (const auto& row : rows)
          for (const auto& ext : extension) {
            std::vector<Term> merged = row;
            if (subj_new) merged[ctx.slot_of[p.subject.var]] = ext[ctx.slot_of[p.subject.var]];
            if (obj_new) merged[ctx.slot_of[p.object.var]] = ext[ctx.slot_of[p.object.var]];
            next.push_back(std::move(merged));
          }
        rows = std::move(next);
      }
      if (subj_new) bound[ctx.slot_of[p.subject.var]] = true;
      if (obj_new) bound[ctx.slot_of[p.object.var]] = true;
      continue;
    }

    // hash the pattern's matches by the joined side(s)
    std::unordered_map<std::string, std::vector<std::uint32_t>> table;
    for (std::uint32_t i : postings) {
      const Triple& t = g.triples()[i];
      if (!matches_concrete(t)) continue;
      std::string key;
      if (subj_join) key += term_key(Term::iri(t.subject));
      if (obj_join) {
        key += '\x01';
        key += term_key(t.object);
      }
      table[key].push_back(i);
    }
    std::vector<std::vector<Term>> next;
    for (auto& row : rows) {
      std::string key;
      if (subj_join) key += term_key(row[ctx.slot_of[p.subject.var]]);
      if (obj_join) {
        key += '\x01';
        key += term_key(row[ctx.slot_of[p.object.var]]);
      }
      auto it = table.find(key);
      if (it == table.end()) continue;
      for (std::uint32_t i : it->second) {
        const Triple& t = g.triples()[i];
        std::vector<Term> merged = row;
        if (subj_new) merged[ctx.slot_of[p.subject.var]] = Term::iri(t.subject);
        if (obj_new) merged[ctx.slot_of[p.object.var]] = t.object;
        next.push_back(std::move(merged));
      }
    }
    rows = std::move(next);
    if (subj_new) bound[ctx.slot_of[p.subject.var]] = true;
    if (obj_new) bound[ctx.slot_of[p.object.var]] = true;
  }

  ResultSet rs;
  rs.vars = q.select_vars;
  for (const auto& row : rows) {
    if (q.filter && !filter_matches(*q.filter, row, ctx.slot_of)) continue;
    std::vector<Term> projected;
    projected.reserve(q.select_vars.size());
    for (const std::string& v : q.select_vars) projected.push_back(row[ctx.slot_of[v]]);
    rs.rows.push_back(std::move(projected));
  }
  std::sort(rs.rows.begin(), rs.rows.end());
  rs.rows.erase(std::unique(rs.rows.begin(), rs.rows.end()), rs.rows.end());
  return rs;
}

}  // namespace query_detail

/// Distinct bindings satisfying all patterns and the filter, sorted.
inline ResultSet eval_static(const Graph& g, const QueryAst& q) {
  auto t0 = std::chrono::steady_clock::now();
  ResultSet rs = query_detail::eval_static_inner(g, q);
  rs.eval_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rs;
}

/// The single event-subject variable shared by every pattern.
inline std::string event_scope_var(const QueryAst& q) {
  std::optional<std::string> var;
  for (const TriplePattern& p : q.patterns) {
    if (!p.subject.is_var)
      throw ContractError("stream evaluation requires variable pattern subjects");
    if (var && *var != p.subject.var)
      throw ContractError("stream evaluation requires all patterns to share one subject variable");
    var = p.subject.var;
  }
  return *var;
}

namespace query_detail {

inline StreamEvalResult eval_batches(std::span<const Graph* const> batches, const QueryAst& q) {
  event_scope_var(q);
  StreamEvalResult out;
  out.result.vars = q.select_vars;
  for (const Graph* g : batches) {
    ResultSet part = eval_static(*g, q);
    out.batch_seconds.push_back(part.eval_seconds);
    out.result.eval_seconds += part.eval_seconds;
    for (auto& row : part.rows) out.result.rows.push_back(std::move(row));
  }
  std::sort(out.result.rows.begin(), out.result.rows.end());
  out.result.rows.erase(std::unique(out.result.rows.begin(), out.result.rows.end()),
                        out.result.rows.end());
  return out;
}

}  // namespace query_detail

/// Batches of `batch_size` consecutive events, each evaluated separately;
/// bindings union to the static result on the same data.
inline StreamEvalResult eval_stream_batched(std::span<const Event> events, const QueryAst& q,
                                            std::size_t batch_size) {
  if (batch_size == 0) throw DomainError("batch size must be positive");
  std::vector<Graph> graphs;
  for (std::size_t at = 0; at < events.size(); at += batch_size) {
    GraphBuilder b;
    std::size_t n = std::min(batch_size, events.size() - at);
    for (std::size_t i = 0; i < n; ++i) {
      auto ts = event_to_triples(events[at + i]);
      b.add(std::span<const Triple>(ts));
    }
    graphs.push_back(std::move(b).freeze());
  }
  if (graphs.empty()) graphs.emplace_back();
  std::vector<const Graph*> ptrs;
  for (const Graph& g : graphs) ptrs.push_back(&g);
  return query_detail::eval_batches(ptrs, q);
}

/// Each chunk is one batch.
inline StreamEvalResult eval_stream_batched(std::span<const TripleChunk> chunks,
                                            const QueryAst& q) {
  if (chunks.empty()) throw DomainError("at least one chunk required");
  std::vector<const Graph*> ptrs;
  for (const TripleChunk& c : chunks) ptrs.push_back(&c.graph);
  return query_detail::eval_batches(ptrs, q);
}

// ---------------------------------------------------------------------------
// Rule compilation.

/// One pattern per distinct pollutant (first-appearance order), filter =
/// the rule's conjunction, select = the event variable.
inline QueryAst compile_rule_to_query(const Rule& r) {
  QueryAst q;
  q.select_vars = {"e"};
  std::map<Pollutant, std::string> var_of;
  std::vector<FilterExpr> cmps;
  for (const Condition& c : r.conditions) {
    auto it = var_of.find(c.pollutant);
    if (it == var_of.end()) {
      std::string var = "v" + std::to_string(var_of.size() + 1);
      var_of.emplace(c.pollutant, var);
      TriplePattern p;
      p.subject = VarOrTerm::variable("e");
      p.predicate = aq_iri(pollutant_lower(c.pollutant));
      p.object = VarOrTerm::variable(var);
      q.patterns.push_back(std::move(p));
      cmps.push_back(FilterExpr::cmp(var, to_cmp_op(c.cmp), c.threshold));
    } else {
      cmps.push_back(FilterExpr::cmp(it->second, to_cmp_op(c.cmp), c.threshold));
    }
  }
  q.filter = FilterExpr::conjunction(std::move(cmps));
  return q;
}

}  // namespace aircep
