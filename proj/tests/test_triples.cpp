#include "aircep/triples.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <fstream>
#include <sstream>

#include "aircep/synth.hpp"

using namespace aircep;

namespace {

Event make_event(std::int64_t seq, const std::string& station = "S1") {
  Event e;
  e.seq = seq;
  e.timestamp = make_timestamp(2020, 1, 1, static_cast<unsigned>(seq % 24));
  e.station = station;
  for (int pi = 0; pi < kPollutantCount; ++pi) e.readings[pi] = 10.0 * (pi + 1) + seq;
  return e;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("an event expands to eleven triples about one subject") {
  Event e = make_event(42, "Delhi");
  std::vector<Triple> ts = event_to_triples(e);
  REQUIRE(ts.size() == 11);
  for (const Triple& t : ts) CHECK(t.subject == "http://example.org/event/42");

  int decimals = 0;
  bool saw_city = false, saw_date = false;
  for (const Triple& t : ts) {
    if (t.predicate == aq_iri("city")) {
      saw_city = true;
      CHECK(t.object == Term::string("Delhi"));
    } else if (t.predicate == aq_iri("date")) {
      saw_date = true;
      CHECK(t.object == Term::date_time(e.timestamp));
    } else {
      ++decimals;
      CHECK(t.object.datatype == Datatype::Decimal);
    }
  }
  CHECK(saw_city);
  CHECK(saw_date);
  CHECK(decimals == kPollutantCount);
  CHECK(ts[0].predicate == aq_iri("pm25"));
  CHECK(ts[0].object == Term::decimal(e.readings[0]));
}

TEST_CASE("graphs are sorted duplicate-free sets") {
  Triple a{"http://example.org/s", aq_iri("pm25"), Term::decimal(1)};
  Triple b{"http://example.org/s", aq_iri("pm10"), Term::decimal(2)};
  GraphBuilder builder;
  builder.add(a);
  builder.add(b);
  builder.add(a);
  Graph g = std::move(builder).freeze();
  CHECK(g.size() == 2);
  CHECK(std::is_sorted(g.triples().begin(), g.triples().end()));

  GraphBuilder other;
  other.add(b);
  other.add(a);
  CHECK(g == std::move(other).freeze());
}

TEST_CASE("predicate index finds exactly the carrying triples") {
  GraphBuilder b;
  for (std::int64_t i = 0; i < 7; ++i) b.add(std::span<const Triple>(event_to_triples(make_event(i))));
  Graph g = std::move(b).freeze();
  CHECK(g.size() == 77);
  auto pm25 = g.with_predicate(aq_iri("pm25"));
  CHECK(pm25.size() == 7);
  for (std::uint32_t i : pm25) CHECK(g.triples()[i].predicate == aq_iri("pm25"));
  CHECK(g.predicate_cardinality(aq_iri("city")) == 7);
  CHECK(g.predicate_cardinality(aq_iri("nope")) == 0);
  CHECK(g.with_predicate("").empty());
}

TEST_CASE("serialization is sorted, line-per-triple, dot-terminated") {
  GraphBuilder b;
  b.add(std::span<const Triple>(event_to_triples(make_event(3))));
  std::string text = serialize_ntriples(std::move(b).freeze());
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 11);
  CHECK(std::is_sorted(lines.begin(), lines.end()));
  for (const std::string& l : lines) {
    CHECK(l.substr(0, 1) == "<");
    CHECK(l.substr(l.size() - 2) == " .");
  }
  CHECK(text.back() == '\n');
}

TEST_CASE("string escapes round-trip through serialization") {
  Triple t{"http://example.org/s", aq_iri("city"),
           Term::string("line\nbreak\ttab \"quote\" back\\slash\rcr")};
  GraphBuilder b;
  b.add(t);
  Graph g = std::move(b).freeze();
  std::string text = serialize_ntriples(g);
  CHECK(text.find('\n') == text.size() - 1);  // escaped newline never raw
  Graph back = parse_ntriples(text);
  CHECK(back == g);
}

TEST_CASE("ntriples parser accepts comments and blank lines") {
  Graph g = parse_ntriples(
      "# header comment\n"
      "\n"
      "<http://example.org/s> <http://example.org/aq#pm25> \"5\"^^<http://www.w3.org/2001/XMLSchema#decimal> .\n"
      "   \n"
      "<http://example.org/s> <http://example.org/aq#city> \"X\"^^<http://www.w3.org/2001/XMLSchema#string> .\n");
  CHECK(g.size() == 2);
}

TEST_CASE("ntriples parse errors carry the line number") {
  auto expect_error = [](std::string_view text, std::size_t line, std::string_view fragment) {
    try {
      parse_ntriples(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == line);
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  std::string ok =
      "<http://example.org/s> <http://example.org/aq#pm25> \"5\"^^<http://www.w3.org/2001/XMLSchema#decimal> .\n";
  expect_error(ok + "not a triple\n", 2, "expected <subject IRI>");
  expect_error("<http://example.org/s> <http://example.org/p>\n", 1, "missing object");
  expect_error("<http://example.org/s> <http://example.org/p> .\n", 1,
               "expected IRI or literal object");
  expect_error("<http://example.org/s> <http://example.org/p> <http://example.org/o>\n", 1,
               "end with '.'");
  expect_error("<http://example.org/s> <http://example.org/p> \"x\" .\n", 1, "^^<datatype>");
  expect_error(
      "<http://example.org/s> <http://example.org/p> \"x\"^^<http://example.org/dt> .\n", 1,
      "unsupported datatype");
  expect_error(
      "<http://example.org/s> <http://example.org/p> \"x\"^^<http://www.w3.org/2001/XMLSchema#decimal> .\n",
      1, "malformed decimal");
  expect_error("<http://example.org/s\n", 1, "unterminated IRI");
}

TEST_CASE("serialize and parse are inverse over synthetic streams") {
  std::vector<Event> events = synth_events(60, 5);
  GraphBuilder b;
  for (const Event& e : events) b.add(std::span<const Triple>(event_to_triples(e)));
  Graph g = std::move(b).freeze();
  Graph back = parse_ntriples(serialize_ntriples(g));
  CHECK(back == g);
  CHECK(serialize_ntriples(back) == serialize_ntriples(g));
}

TEST_CASE("chunk labels follow spreadsheet-column order") {
  CHECK(chunk_label(0) == "A");
  CHECK(chunk_label(4) == "E");
  CHECK(chunk_label(25) == "Z");
  CHECK(chunk_label(26) == "AA");
  CHECK(chunk_label(27) == "AB");
  CHECK(chunk_label(51) == "AZ");
  CHECK(chunk_label(52) == "BA");
  CHECK(chunk_label(701) == "ZZ");
  CHECK(chunk_label(702) == "AAA");
}

TEST_CASE("chunking slices consecutive events by the requested sizes") {
  std::vector<Event> events;
  for (std::int64_t i = 0; i < 5; ++i) events.push_back(make_event(i));
  std::vector<std::size_t> sizes = {2, 3};
  std::vector<TripleChunk> chunks = chunk_graph(events, sizes);
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].label == "A");
  CHECK(chunks[0].event_count == 2);
  CHECK(chunks[0].graph.size() == 22);
  CHECK(chunks[1].label == "B");
  CHECK(chunks[1].event_count == 3);
  CHECK(chunks[1].graph.size() == 33);
  CHECK(chunks[0].graph.predicate_cardinality(aq_iri("pm25")) == 2);

  CHECK_THROWS_AS(chunk_graph(events, std::vector<std::size_t>{0}), DomainError);
  CHECK_THROWS_AS(chunk_graph(events, std::vector<std::size_t>{4, 2}), DomainError);
}

TEST_CASE("tiling covers the stream with a short tail chunk") {
  std::vector<Event> events;
  for (std::int64_t i = 0; i < 17; ++i) events.push_back(make_event(i));
  std::vector<TripleChunk> chunks = chunk_graph_tiled(events, 5);
  REQUIRE(chunks.size() == 4);
  CHECK(chunks[3].label == "D");
  CHECK(chunks[3].event_count == 2);
  std::size_t total = 0;
  for (const TripleChunk& c : chunks) total += c.event_count;
  CHECK(total == 17);
  CHECK_THROWS_AS(chunk_graph_tiled(events, 0), DomainError);
}

TEST_CASE("merging chunks is the set union of their graphs") {
  std::vector<Event> events;
  for (std::int64_t i = 0; i < 6; ++i) events.push_back(make_event(i));
  std::vector<std::size_t> sizes = {2, 2, 2};
  std::vector<TripleChunk> chunks = chunk_graph(events, sizes);

  TripleChunk ab = merge_chunks(std::vector<TripleChunk>{chunks[0], chunks[1]});
  CHECK(ab.label == "A+B");
  CHECK(ab.event_count == 4);
  CHECK(ab.graph.size() == 44);

  TripleChunk ba = merge_chunks(std::vector<TripleChunk>{chunks[1], chunks[0]});
  CHECK(ba.label == "B+A");
  CHECK(ba.graph == ab.graph);

  TripleChunk all = merge_chunks(chunks);
  GraphBuilder direct;
  for (const Event& e : events) direct.add(std::span<const Triple>(event_to_triples(e)));
  CHECK(all.graph == std::move(direct).freeze());
  CHECK(all.label == "A+B+C");

  TripleChunk aa = merge_chunks(std::vector<TripleChunk>{chunks[0], chunks[0]});
  CHECK(aa.graph == chunks[0].graph);

  CHECK_THROWS_AS(merge_chunks(std::span<const TripleChunk>{}), ContractError);
}

TEST_CASE("default knowledge graph carries four facts per category") {
  KnowledgeGraph kg = default_knowledge_graph();
  CHECK(kg.graph.size() == 4 * kCategoryCount);
  for (Category c : kAllCategories) {
    std::string advisory = advisory_lookup(kg, c);
    CHECK_FALSE(advisory.empty());
  }
  CHECK(advisory_lookup(kg, Category::Good) !=
        advisory_lookup(kg, Category::Severe));
}

TEST_CASE("advisory lookup picks the lexicographically least and throws when absent") {
  GraphBuilder b;
  std::string subject = category_subject(Category::Poor);
  b.add(Triple{subject, aq_iri("advisory"), Term::string("b-advice")});
  b.add(Triple{subject, aq_iri("advisory"), Term::string("a-advice")});
  KnowledgeGraph kg{std::move(b).freeze()};
  CHECK(advisory_lookup(kg, Category::Poor) == "a-advice");
  CHECK_THROWS_AS(advisory_lookup(kg, Category::Good), LookupError);
  CHECK_THROWS_AS(advisory_lookup(KnowledgeGraph{}, Category::Good), LookupError);
}

TEST_CASE("shipped knowledge graph fixture matches the builtin") {
  std::string text = read_file(std::string(AIRCEP_DATA_DIR) + "/knowledge_graph.nt");
  Graph parsed = parse_ntriples(text);
  CHECK(parsed == default_knowledge_graph().graph);
  CHECK(serialize_ntriples(default_knowledge_graph().graph) == text);
}
