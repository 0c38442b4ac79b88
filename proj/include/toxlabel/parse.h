#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "toxlabel/taxonomy.h"

namespace toxlabel {

struct LlmAnnotation {
  std::string record_id;
  BinaryLabel overall = BinaryLabel::kNonToxic;
  std::vector<SpanLabel> spans;  // empty iff overall is non-toxic
  std::vector<Violation> violations;
  std::string raw;

  std::set<Category> categories() const;  // union over spans
  std::set<Subtopic> subtopics() const;

  friend bool operator==(const LlmAnnotation&, const LlmAnnotation&) = default;
};

// Returns the first balanced {...} block that decodes as a JSON object, skipping
// any prose or markdown fences around it. Blocks that fail strict decoding get
// one repair pass: a missing comma between adjacent members or elements is
// inserted and trailing commas are dropped.
std::optional<nlohmann::json> extract_json_object(std::string_view text);

// Throws Error(kParseFailure) when no object is found, overall_category is
// missing or not exactly "toxic"/"non-toxic", a toxic line has no spans, a
// non-toxic line carries spans, or a label string is not in the taxonomy.
// Rule violations are attached, never rejected.
LlmAnnotation parse_response(std::string_view record_id, std::string_view body_text,
                             const Taxonomy& taxonomy = Taxonomy::builtin());

struct ParseOutcome {
  std::optional<LlmAnnotation> annotation;
  std::string failure;  // set when annotation is empty
};

// Non-throwing variant; never fails on arbitrary input bytes.
ParseOutcome try_parse_response(std::string_view record_id, std::string_view body_text,
                                const Taxonomy& taxonomy = Taxonomy::builtin()) noexcept;

// Canonical form: {"overall_category": ..., "spans": [{"text", "category", "subtopic"}]}
// with display names in severity / subtopic order.
nlohmann::ordered_json to_json(const LlmAnnotation& a);

}  // namespace toxlabel
