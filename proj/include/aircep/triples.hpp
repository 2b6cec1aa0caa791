#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "aircep/core.hpp"
#include "aircep/ingest.hpp"

namespace aircep {

inline constexpr std::string_view kExPrefix = "http://example.org/";
inline constexpr std::string_view kAqPrefix = "http://example.org/aq#";
inline constexpr std::string_view kXsdPrefix = "http://www.w3.org/2001/XMLSchema#";

enum class Datatype { Decimal, DateTime, String };

inline constexpr std::string_view datatype_iri(Datatype d) {
  switch (d) {
    case Datatype::Decimal: return "http://www.w3.org/2001/XMLSchema#decimal";
    case Datatype::DateTime: return "http://www.w3.org/2001/XMLSchema#dateTime";
    case Datatype::String: return "http://www.w3.org/2001/XMLSchema#string";
  }
  return "";
}

/// Iri or typed literal. `text` is the IRI or the literal's lexical form.
struct Term {
  enum class Kind { Iri, Literal } kind = Kind::Iri;
  std::string text;
  Datatype datatype = Datatype::String;  // literals only

  static Term iri(std::string t) { return Term{Kind::Iri, std::move(t), Datatype::String}; }
  static Term literal(std::string lex, Datatype d) {
    return Term{Kind::Literal, std::move(lex), d};
  }
  static Term decimal(double v) { return literal(format_double(v), Datatype::Decimal); }
  static Term date_time(Timestamp t) { return literal(format_iso8601(t), Datatype::DateTime); }
  static Term string(std::string s) { return literal(std::move(s), Datatype::String); }

  bool operator==(const Term&) const = default;
  auto operator<=>(const Term&) const = default;
};

struct Triple {
  std::string subject;    // IRI
  std::string predicate;  // IRI
  Term object;

  bool operator==(const Triple&) const = default;
  auto operator<=>(const Triple&) const = default;
};

/// Immutable triple set with a lazily built predicate-first index.
class Graph {
public:
  Graph() : index_(std::make_shared<IndexState>()) {}

  std::span<const Triple> triples() const { return triples_; }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  bool operator==(const Graph& o) const { return triples_ == o.triples_; }

  /// Positions of triples carrying the predicate; empty when absent.
  std::span<const std::uint32_t> with_predicate(std::string_view predicate) const {
    const auto& idx = index();
    auto it = idx.find(std::string(predicate));
    if (it == idx.end()) return {};
    return it->second;
  }

  std::size_t predicate_cardinality(std::string_view predicate) const {
    return with_predicate(predicate).size();
  }

private:
  friend class GraphBuilder;
  friend Graph merge_graphs(std::span<const Graph* const>);

  struct IndexState {
    std::once_flag once;
    std::map<std::string, std::vector<std::uint32_t>> by_predicate;
  };

  const std::map<std::string, std::vector<std::uint32_t>>& index() const {
    std::call_once(index_->once, [this] {
      for (std::uint32_t i = 0; i < triples_.size(); ++i)
        index_->by_predicate[triples_[i].predicate].push_back(i);
    });
    return index_->by_predicate;
  }

  std::vector<Triple> triples_;  // sorted, unique
  std::shared_ptr<IndexState> index_;
};

/// Accumulates triples, then freezes into a set-semantics Graph.
class GraphBuilder {
public:
  void add(Triple t) { triples_.push_back(std::move(t)); }
  void add(std::span<const Triple> ts) {
    triples_.insert(triples_.end(), ts.begin(), ts.end());
  }

  Graph freeze() && {
    std::sort(triples_.begin(), triples_.end());
    triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
    Graph g;
    g.triples_ = std::move(triples_);
    return g;
  }

private:
  std::vector<Triple> triples_;
};

inline Graph merge_graphs(std::span<const Graph* const> graphs) {
  GraphBuilder b;
  for (const Graph* g : graphs) b.add(g->triples());
  return std::move(b).freeze();
}

// ---------------------------------------------------------------------------
// Event conversion.

inline std::string aq_iri(std::string_view local) {
  return std::string(kAqPrefix) + std::string(local);
}

inline std::string event_subject(std::int64_t seq) {
  return std::string(kExPrefix) + "event/" + std::to_string(seq);
}

/// 11 triples: one decimal per pollutant, plus city string and date dateTime.
inline std::vector<Triple> event_to_triples(const Event& e) {
  std::vector<Triple> out;
  out.reserve(kPollutantCount + 2);
  std::string subject = event_subject(e.seq);
  for (int pi = 0; pi < kPollutantCount; ++pi)
    out.push_back(Triple{subject, aq_iri(pollutant_lower(static_cast<Pollutant>(pi))),
                         Term::decimal(e.readings[pi])});
  out.push_back(Triple{subject, aq_iri("city"), Term::string(e.station)});
  out.push_back(Triple{subject, aq_iri("date"), Term::date_time(e.timestamp)});
  return out;
}

// ---------------------------------------------------------------------------
// N-Triples serialization.

namespace triples_detail {

inline void escape_into(std::string_view s, std::string& out) {
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
}

inline std::string unescape(std::string_view s, std::size_t line_no) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i >= s.size()) throw ParseError(line_no, 1, "dangling escape in literal");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case '"': out += '"'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 't': out += '\t'; break;
      default: throw ParseError(line_no, 1, std::string("unknown escape \\") + s[i]);
    }
  }
  return out;
}

}  // namespace triples_detail

inline std::string serialize_term(const Term& t) {
  if (t.kind == Term::Kind::Iri) return "<" + t.text + ">";
  std::string out = "\"";
  triples_detail::escape_into(t.text, out);
  out += "\"^^<";
  out += datatype_iri(t.datatype);
  out += ">";
  return out;
}

inline std::string serialize_triple(const Triple& t) {
  return "<" + t.subject + "> <" + t.predicate + "> " + serialize_term(t.object) + " .";
}

/// One sorted line per triple; pure function of the triple set.
inline std::string serialize_ntriples(const Graph& g) {
  std::vector<std::string> lines;
  lines.reserve(g.size());
  for (const Triple& t : g.triples()) lines.push_back(serialize_triple(t));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

inline Graph parse_ntriples(std::string_view text) {
  GraphBuilder b;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, (eol == std::string_view::npos ? text.size() : eol) - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty() || rest.front() == '#') continue;

    auto take_iri = [&](std::string_view what) {
      if (rest.empty() || rest.front() != '<')
        throw ParseError(line_no, 1, "expected <" + std::string(what) + " IRI>");
      std::size_t end = rest.find('>');
      if (end == std::string_view::npos) throw ParseError(line_no, 1, "unterminated IRI");
      std::string iri(rest.substr(1, end - 1));
      if (iri.empty()) throw ParseError(line_no, 1, "empty IRI");
      rest = trim(rest.substr(end + 1));
      return iri;
    };

    Triple t;
    t.subject = take_iri("subject");
    t.predicate = take_iri("predicate");
    if (rest.empty()) throw ParseError(line_no, 1, "missing object");
    if (rest.front() == '<') {
      t.object = Term::iri(take_iri("object"));
    } else if (rest.front() == '"') {
      std::size_t end = 1;
      while (end < rest.size() && rest[end] != '"') end += (rest[end] == '\\') ? 2 : 1;
      if (end >= rest.size()) throw ParseError(line_no, 1, "unterminated literal");
      std::string lex = triples_detail::unescape(rest.substr(1, end - 1), line_no);
      rest = rest.substr(end + 1);
      if (rest.size() < 2 || rest[0] != '^' || rest[1] != '^')
        throw ParseError(line_no, 1, "literal missing ^^<datatype>");
      rest = trim(rest.substr(2));
      std::string dt = take_iri("datatype");
      Datatype d;
      if (dt == datatype_iri(Datatype::Decimal)) d = Datatype::Decimal;
      else if (dt == datatype_iri(Datatype::DateTime)) d = Datatype::DateTime;
      else if (dt == datatype_iri(Datatype::String)) d = Datatype::String;
      else throw ParseError(line_no, 1, "unsupported datatype <" + dt + ">");
      if (d == Datatype::Decimal && !parse_double(lex))
        throw ParseError(line_no, 1, "malformed decimal literal \"" + lex + "\"");
      t.object = Term::literal(std::move(lex), d);
    } else {
      throw ParseError(line_no, 1, "expected IRI or literal object");
    }
    if (rest != ".") throw ParseError(line_no, 1, "line must end with '.'");
    b.add(std::move(t));
  }
  return std::move(b).freeze();
}

// ---------------------------------------------------------------------------
// Chunking.

struct TripleChunk {
  std::string label;
  Graph graph;
  std::size_t event_count = 0;
};

/// A, B, ... Z, AA, AB, ... in spreadsheet-column order.
inline std::string chunk_label(std::size_t index) {
  std::string out;
  std::size_t n = index + 1;
  while (n > 0) {
    out += static_cast<char>('A' + (n - 1) % 26);
    n = (n - 1) / 26;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

/// Chunk k holds exactly sizes[k] consecutive events' triples.
inline std::vector<TripleChunk> chunk_graph(std::span<const Event> events,
                                            std::span<const std::size_t> sizes) {
  std::size_t total = 0;
  for (std::size_t s : sizes) {
    if (s == 0) throw DomainError("chunk size must be positive");
    total += s;
  }
  if (total > events.size())
    throw DomainError("chunk sizes sum to " + std::to_string(total) + " but only " +
                      std::to_string(events.size()) + " events are available");
  std::vector<TripleChunk> out;
  std::size_t at = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    GraphBuilder b;
    for (std::size_t i = 0; i < sizes[k]; ++i) {
      auto ts = event_to_triples(events[at + i]);
      b.add(std::span<const Triple>(ts));
    }
    out.push_back(TripleChunk{chunk_label(k), std::move(b).freeze(), sizes[k]});
    at += sizes[k];
  }
  return out;
}

/// Tiles the whole stream at `size`, last chunk holding the remainder.
inline std::vector<TripleChunk> chunk_graph_tiled(std::span<const Event> events, std::size_t size) {
  if (size == 0) throw DomainError("chunk size must be positive");
  std::vector<std::size_t> sizes;
  std::size_t remaining = events.size();
  while (remaining > 0) {
    std::size_t s = std::min(size, remaining);
    sizes.push_back(s);
    remaining -= s;
  }
  return chunk_graph(events, sizes);
}

/// Set union of member graphs; labels join with '+', event counts sum.
inline TripleChunk merge_chunks(std::span<const TripleChunk> chunks) {
  if (chunks.empty()) throw ContractError("merge_chunks requires a non-empty chunk list");
  TripleChunk out;
  GraphBuilder b;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (i) out.label += "+";
    out.label += chunks[i].label;
    b.add(chunks[i].graph.triples());
    out.event_count += chunks[i].event_count;
  }
  out.graph = std::move(b).freeze();
  return out;
}

// ---------------------------------------------------------------------------
// Knowledge graph of category advisories.

struct KnowledgeGraph {
  Graph graph;
};

inline std::string category_subject(Category c) {
  return std::string(kExPrefix) + "category/" + std::string(category_name(c));
}

inline KnowledgeGraph default_knowledge_graph() {
  constexpr std::array<std::string_view, kCategoryCount> advisories = {
      "Air quality poses minimal health impact; outdoor activity is safe.",
      "Minor breathing discomfort possible for sensitive people.",
      "Breathing discomfort possible for people with asthma, heart or lung disease, "
      "children, and older adults; sensitive groups should limit prolonged exertion.",
      "Breathing discomfort likely for most people on prolonged exposure; "
      "reduce outdoor exertion.",
      "Risk of respiratory illness on prolonged exposure; avoid outdoor activity "
      "where possible.",
      "Serious health impact even on healthy people; stay indoors and keep "
      "activity levels low.",
  };
  GraphBuilder b;
  for (int ci = 0; ci < kCategoryCount; ++ci) {
    Category c = static_cast<Category>(ci);
    std::string subject = category_subject(c);
    CategoryRange range = category_range(c);
    b.add(Triple{subject, aq_iri("advisory"), Term::string(std::string(advisories[ci]))});
    b.add(Triple{subject, aq_iri("label"), Term::string(std::string(category_name(c)))});
    b.add(Triple{subject, aq_iri("aqiLo"), Term::decimal(range.lo)});
    b.add(Triple{subject, aq_iri("aqiHi"), Term::decimal(range.hi)});
  }
  return KnowledgeGraph{std::move(b).freeze()};
}

/// Lexicographically least advisory string for the category.
inline std::string advisory_lookup(const KnowledgeGraph& kg, Category c) {
  std::string subject = category_subject(c);
  std::string pred = aq_iri("advisory");
  std::optional<std::string> best;
  for (std::uint32_t i : kg.graph.with_predicate(pred)) {
    const Triple& t = kg.graph.triples()[i];
    if (t.subject != subject || t.object.kind != Term::Kind::Literal) continue;
    if (!best || t.object.text < *best) best = t.object.text;
  }
  if (!best)
    throw LookupError("no advisory for category " + std::string(category_name(c)));
  return *best;
}

}  // namespace aircep
