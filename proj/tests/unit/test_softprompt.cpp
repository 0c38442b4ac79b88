#include <doctest.h>

#include <random>

#include "toxlabel/error.h"
#include "toxlabel/softprompt.h"

using namespace toxlabel;

namespace {

std::vector<std::string> texts(const AssembledSequence& s) {
  std::vector<std::string> out;
  for (const auto& seg : s.segments) out.push_back(seg.text);
  return out;
}

std::int64_t unit(std::string_view) { return 1; }

std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const std::string alphabet = "abc xyz\xC3\xA9";
  std::string s;
  const auto n = rng() % max_len;
  for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % (alphabet.size() - 2)];
  if (rng() % 4 == 0) s += "\xC3\xA9";
  return s;
}

}  // namespace

TEST_CASE("before-context layout") {
  auto s = assemble("r", {"c1", "c2", "c3"}, "line", GameToken::kGame1);
  CHECK(texts(s) == std::vector<std::string>{"GAME_1", "c1", "c2", "c3", "[SEP]", "line"});
  CHECK(s.segments[0].kind == SegmentKind::kGameToken);
  CHECK(s.segments[4].kind == SegmentKind::kSeparator);
  CHECK(s.segments[5].kind == SegmentKind::kCurrentLine);
  CHECK(s.length_units == 2 + 1 + 1 + 1 + 1);
  CHECK(s.context_dropped == 0);
}

TEST_CASE("before-current-line layout and empty context") {
  AssembleOptions o;
  o.placement = Placement::kBeforeCurrentLine;
  auto s = assemble("r", {"c1"}, "line", GameToken::kMlsnt, o);
  CHECK(texts(s) == std::vector<std::string>{"c1", "[SEP]", "MLSNT", "line"});
  auto bare = assemble("r", {}, "line", GameToken::kGame1);
  CHECK(texts(bare) == std::vector<std::string>{"GAME_1", "[SEP]", "line"});
}

TEST_CASE("oldest context is dropped first") {
  AssembleOptions o;
  o.length_fn = unit;
  o.max_len = 3 + 3;  // token, SEP, line, plus room for three of five context lines
  auto s = assemble("r", {"a", "b", "c", "d", "e"}, "line", GameToken::kGame2, o);
  CHECK(texts(s) == std::vector<std::string>{"GAME_2", "c", "d", "e", "[SEP]", "line"});
  CHECK(s.context_dropped == 2);
  CHECK(s.length_units == 6);
}

TEST_CASE("current line that cannot fit") {
  AssembleOptions o;
  o.max_len = 4;
  try {
    assemble("r", {}, std::string(20, 'x'), GameToken::kGame1, o);
    FAIL("expected CurrentLineTooLong");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCurrentLineTooLong);
  }
  CHECK_NOTHROW(assemble("r", {}, std::string(8, 'x'), GameToken::kGame1, o));
}

TEST_CASE("assembly invariants on random records") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::string> ctx(rng() % 8);
    for (auto& c : ctx) c = random_text(rng, 120);
    const auto line = random_text(rng, 200);
    AssembleOptions o;
    o.max_len = 60 + static_cast<std::int64_t>(rng() % 100);
    o.placement = rng() % 2 ? Placement::kBeforeContext : Placement::kBeforeCurrentLine;
    const auto token = static_cast<GameToken>(rng() % 4);
    auto s = assemble("r", ctx, line, token, o);

    if (o.placement == Placement::kBeforeContext) CHECK(s.segments.front().kind == SegmentKind::kGameToken);
    CHECK(s.segments.back().kind == SegmentKind::kCurrentLine);
    CHECK(s.segments.back().text == line);
    CHECK(std::count_if(s.segments.begin(), s.segments.end(),
                        [](const Segment& g) { return g.kind == SegmentKind::kGameToken; }) == 1);
    CHECK(s.length_units <= o.max_len);

    // recount the length independently
    std::int64_t units = 0;
    std::size_t kept_context = 0;
    for (const auto& g : s.segments) {
      if (g.kind == SegmentKind::kContextLine) {
        units += default_length_units(g.text);
        ++kept_context;
      } else if (g.kind == SegmentKind::kCurrentLine) {
        units += default_length_units(g.text);
      } else {
        units += 1;
      }
    }
    CHECK(units == s.length_units);
    CHECK(kept_context + s.context_dropped == ctx.size());
    // kept context is a suffix of the input
    for (std::size_t k = 0; k < kept_context; ++k) {
      CHECK(s.segments[(o.placement == Placement::kBeforeContext ? 1 : 0) + k].text == ctx[s.context_dropped + k]);
    }

    // more room never drops more context
    auto wider = o;
    wider.max_len += static_cast<std::int64_t>(rng() % 50);
    CHECK(assemble("r", ctx, line, token, wider).context_dropped <= s.context_dropped);
    CHECK(assemble("r", ctx, line, token, o) == s);
  }
}

TEST_CASE("corpus tokens follow origins") {
  std::vector<CorpusRecord> records = {
      {"a", "g1", {}, "x", {"Hate"}}, {"b", "g1", {}, "y", {}}, {"c", "mlsnt", {"ctx"}, "z", {"Non-Toxic"}}};
  std::map<std::string, GameToken, std::less<>> map = {{"g1", GameToken::kGame1}, {"mlsnt", GameToken::kMlsnt}};
  auto corpus = build_corpus(records, map);
  REQUIRE(corpus.size() == 3);
  CHECK(corpus[0].token == GameToken::kGame1);
  CHECK(corpus[1].token == GameToken::kGame1);
  CHECK(corpus[2].token == GameToken::kMlsnt);
  CHECK(corpus[0].labels == std::vector<std::string>{"Hate"});

  auto unknown = build_corpus(records, map, {}, GameToken::kGameUnknown);
  for (const auto& s : unknown) CHECK(s.token == GameToken::kGameUnknown);

  records.push_back({"d", "GAME_3", {}, "w", {}});
  try {
    build_corpus(records, map);
    FAIL("expected UnmappedOrigin");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnmappedOrigin);
  }
  CHECK(build_corpus(records, map, {}, GameToken::kGameUnknown).size() == 4);
}

TEST_CASE("names and json rows") {
  for (auto t : {GameToken::kGame1, GameToken::kGame2, GameToken::kMlsnt, GameToken::kGameUnknown}) {
    CHECK(game_token_from_string(to_string(t)) == t);
  }
  CHECK_FALSE(game_token_from_string("GAME_3"));
  CHECK(placement_from_string("before_current_line") == Placement::kBeforeCurrentLine);
  CHECK_THROWS_AS(placement_from_string("after"), Error);

  auto j = to_json(assemble("r", {"c"}, "l", GameToken::kGame1));
  CHECK(j.dump() ==
        R"({"id":"r","token":"GAME_1","segments":[{"kind":"game_token","text":"GAME_1"},)"
        R"({"kind":"context_line","text":"c"},{"kind":"separator","text":"[SEP]"},)"
        R"({"kind":"current_line","text":"l"}],"labels":[]})");

  auto mlsnt = corpus_record_from_json(nlohmann::json::parse(
      R"({"id":"x","source":"COLD","text":"t","context":["a"],"final_binary":"toxic","final_categories":["Hate"]})"));
  CHECK(mlsnt.origin == "MLSNT");
  CHECK(mlsnt.labels == std::vector<std::string>{"Hate"});
  CHECK(mlsnt.context == std::vector<std::string>{"a"});
  auto clean = corpus_record_from_json(
      nlohmann::json::parse(R"({"id":"y","text":"t","final_binary":"non-toxic","final_categories":[]})"));
  CHECK(clean.labels == std::vector<std::string>{"Non-Toxic"});
  auto generic = corpus_record_from_json(nlohmann::json::parse(R"({"id":"z","origin":"g1","text":"t"})"));
  CHECK(generic.origin == "g1");
  CHECK_THROWS_AS(corpus_record_from_json(nlohmann::json::parse(R"({"id":"z"})")), Error);
}
