#include <doctest.h>

#include <fstream>
#include <set>

#include "toxlabel/error.h"
#include "toxlabel/taxonomy.h"

using namespace toxlabel;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidConfig;
}

}  // namespace

TEST_CASE("display names follow the prompt") {
  CHECK(display_name(Category::kThreatsLife) == "Threats (Life Threatening)");
  CHECK(display_name(Category::kThreatsNonLife) == "Threats (Non-Life Threatening)");
  CHECK(display_name(Category::kSexualContent) == "Sexual Content / Harassment");
  CHECK(display_name(Category::kControversial) == "Controversial / Potentially Toxic Topic");
  CHECK(display_name(Category::kNonToxic) == "Non-Toxic");
  CHECK(display_name(Subtopic::kShockingContent) == "Shocking / Disgusting Content");
  CHECK(display_name(Subtopic::kOtherOffensive) == "Other Offensive Content");
}

TEST_CASE("parse_category") {
  CHECK(parse_category("Insults") == Category::kInsults);
  CHECK(parse_category("insults ") == Category::kInsults);
  CHECK(parse_category("sexual content/harassment") == Category::kSexualContent);
  CHECK(parse_category("Sexual Content/ Harassment") == Category::kSexualContent);
  CHECK(parse_category("threats ( life threatening )") == Category::kThreatsLife);
  CHECK(parse_category("THREATS (NON-LIFE THREATENING)") == Category::kThreatsNonLife);
  CHECK(parse_category("threats_life") == Category::kThreatsLife);
  CHECK(code_of([] { parse_category("Mean Words"); }) == ErrorCode::kUnknownCategory);
  CHECK(code_of([] { parse_category(""); }) == ErrorCode::kUnknownCategory);
}

TEST_CASE("parse_category inverts display_name for all labels") {
  for (Category c : kAllLabels) CHECK(parse_category(display_name(c)) == c);
  for (std::size_t i = 0; i < kSubtopicCount; ++i) {
    const auto s = static_cast<Subtopic>(i);
    CHECK(parse_subtopic(display_name(s)) == s);
    CHECK(parse_subtopic(id_of(s)) == s);
  }
}

TEST_CASE("severity_rank") {
  CHECK(severity_rank(Category::kThreatsLife) == 1);
  CHECK(severity_rank(Category::kHate) == 4);
  CHECK(severity_rank(Category::kControversial) == 8);
  CHECK(code_of([] { severity_rank(Category::kNonToxic); }) == ErrorCode::kNotToxic);
  std::set<int> ranks;
  for (Category c : kToxicCategories) ranks.insert(severity_rank(c));
  CHECK(ranks == std::set<int>{1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("primary category is the most severe member") {
  CHECK(primary_category({Category::kInsults, Category::kHate}) == Category::kHate);
  CHECK(primary_category({Category::kControversial}) == Category::kControversial);
}

TEST_CASE("validate_spans") {
  SpanLabel both{"x", {Category::kThreatsLife, Category::kThreatsNonLife}, {}};
  auto v = validate_spans({both});
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::kThreatExclusivity);
  CHECK(v[0].severity == ViolationSeverity::kHard);

  CHECK(validate_spans({SpanLabel{"retard", {Category::kInsults}, {}}}).empty());

  auto missing = validate_spans({SpanLabel{"y", {Category::kControversial}, {}}});
  REQUIRE(missing.size() == 1);
  CHECK(missing[0].kind == ViolationKind::kMissingSubtopic);

  auto extremism = validate_spans({SpanLabel{"z", {Category::kExtremism}, {}}});
  REQUIRE(extremism.size() == 1);
  CHECK(extremism[0].kind == ViolationKind::kExtremismWithoutPolitics);
  CHECK(extremism[0].severity == ViolationSeverity::kSoft);

  CHECK(validate_spans({SpanLabel{"z", {Category::kExtremism, Category::kControversial}, {Subtopic::kPolitics}}})
            .empty());

  auto stray = validate_spans({SpanLabel{"w", {Category::kInsults}, {Subtopic::kAlcohol}}});
  REQUIRE(stray.size() == 1);
  CHECK(stray[0].kind == ViolationKind::kSubtopicWithoutControversial);
}

TEST_CASE("validate_spans is pure and order stable") {
  std::vector<SpanLabel> spans = {
      {"a", {Category::kControversial}, {}},
      {"b", {Category::kThreatsLife, Category::kThreatsNonLife}, {}},
      {"c", {Category::kExtremism}, {}},
  };
  auto first = validate_spans(spans);
  CHECK(first == validate_spans(spans));
  REQUIRE(first.size() == 3);
  CHECK(first[0].span_index == 0);
  CHECK(first[1].span_index == 1);
  CHECK(first[2].span_index == 2);
}

TEST_CASE("taxonomy document round-trips and accepts aliases only") {
  auto doc = Taxonomy::builtin().to_json();
  CHECK(doc["version"] == 1);
  CHECK(doc["categories"].size() == 9);
  CHECK(doc["subtopics"].size() == 14);
  auto again = Taxonomy::from_json(doc);
  CHECK(again.to_json() == doc);

  auto aliased = doc;
  for (auto& c : aliased["categories"]) {
    if (c["id"] == "insults") c["aliases"] = {"Mean Words"};
  }
  auto t = Taxonomy::from_json(aliased);
  CHECK(t.parse_category("mean words") == Category::kInsults);

  auto renamed = doc;
  renamed["categories"][0]["display_name"] = "Threats";
  CHECK(code_of([&] { Taxonomy::from_json(renamed); }) == ErrorCode::kInvalidTaxonomy);

  auto dropped = doc;
  dropped["categories"].erase(3);
  CHECK(code_of([&] { Taxonomy::from_json(dropped); }) == ErrorCode::kInvalidTaxonomy);

  auto reranked = doc;
  reranked["categories"][0]["severity_rank"] = 5;
  CHECK(code_of([&] { Taxonomy::from_json(reranked); }) == ErrorCode::kInvalidTaxonomy);

  auto clash = doc;
  for (auto& c : clash["categories"]) {
    if (c["id"] == "hate") c["aliases"] = {"insults"};
  }
  CHECK(code_of([&] { Taxonomy::from_json(clash); }) == ErrorCode::kInvalidTaxonomy);

  auto v2 = doc;
  v2["version"] = 2;
  CHECK(code_of([&] { Taxonomy::from_json(v2); }) == ErrorCode::kInvalidTaxonomy);
}

TEST_CASE("shipped taxonomy document loads") {
  auto t = Taxonomy::from_file(TOXLABEL_ASSET_DIR "/taxonomy_v1.json");
  CHECK(t.parse_category("Hate") == Category::kHate);
}
