#include "toxlabel/parse.h"

#include <algorithm>

#include "toxlabel/error.h"

namespace toxlabel {

namespace {

constexpr std::size_t kMaxDepth = 64;

// End (exclusive) of the balanced object starting at `start`, honoring JSON
// string quoting. nullopt if unbalanced or nested deeper than kMaxDepth.
std::optional<std::size_t> match_object(std::string_view text, std::size_t start) {
  std::size_t depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      if (++depth > kMaxDepth) return std::nullopt;
    } else if (c == '}' || c == ']') {
      if (depth == 0) return std::nullopt;
      if (--depth == 0) return c == '}' ? std::optional<std::size_t>(i + 1) : std::nullopt;
    }
  }
  return std::nullopt;
}

bool ends_value(char c) {
  return c == '"' || c == '}' || c == ']' || c == 'e' || c == 'l' || (c >= '0' && c <= '9');
}

// Inserts commas the model forgot between adjacent values and drops trailing
// commas before a closing bracket.
std::string repair_separators(std::string_view candidate) {
  std::string out;
  out.reserve(candidate.size() + 8);
  bool in_string = false;
  bool escaped = false;
  char last = '\0';
  std::size_t last_pos = 0;
  for (char c : candidate) {
    if (in_string) {
      out.push_back(c);
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
        last = '"';
        last_pos = out.size() - 1;
      }
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      out.push_back(c);
      continue;
    }
    if ((c == '"' || c == '{' || c == '[') && ends_value(last)) out.push_back(',');
    if ((c == '}' || c == ']') && last == ',') out.erase(last_pos, 1);
    out.push_back(c);
    last = c;
    last_pos = out.size() - 1;
    if (c == '"') {
      in_string = true;
      last = '\0';
    }
  }
  return out;
}

std::optional<nlohmann::json> decode_object(std::string_view candidate) {
  auto j = nlohmann::json::parse(candidate, nullptr, /*allow_exceptions=*/false);
  if (!j.is_discarded() && j.is_object()) return j;
  return std::nullopt;
}

[[noreturn]] void fail(std::string_view record_id, const std::string& why) {
  throw Error(ErrorCode::kParseFailure, std::string(record_id) + ": " + why);
}

std::vector<std::string> string_list(const nlohmann::json& v, std::string_view record_id, std::string_view field) {
  std::vector<std::string> out;
  if (v.is_null()) return out;
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
    return out;
  }
  if (!v.is_array()) fail(record_id, std::string(field) + " must be a string or a list of strings");
  for (const auto& e : v) {
    if (!e.is_string()) fail(record_id, std::string(field) + " entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

SpanLabel parse_span(const nlohmann::json& s, std::string_view record_id, const Taxonomy& taxonomy) {
  if (!s.is_object()) fail(record_id, "span is not an object");
  SpanLabel span;
  auto text = s.find("text");
  if (text == s.end() || !text->is_string()) fail(record_id, "span without text");
  span.text = text->get<std::string>();

  auto cat = s.find("category");
  if (cat == s.end()) cat = s.find("categories");
  if (cat != s.end()) {
    for (const auto& label : string_list(*cat, record_id, "category")) {
      if (auto c = taxonomy.find_category(label)) {
        if (!is_toxic(*c)) fail(record_id, "span labelled Non-Toxic");
        span.categories.insert(*c);
      } else if (auto st = taxonomy.find_subtopic(label)) {
        span.subtopics.insert(*st);
      } else {
        fail(record_id, "unknown category '" + label + "'");
      }
    }
  }
  for (const char* key : {"subtopic", "subtopics"}) {
    auto sub = s.find(key);
    if (sub == s.end()) continue;
    for (const auto& label : string_list(*sub, record_id, key)) {
      auto st = taxonomy.find_subtopic(label);
      if (!st) fail(record_id, "unknown subtopic '" + label + "'");
      span.subtopics.insert(*st);
    }
  }
  // a subtopic is only ever a refinement of Controversial
  if (!span.subtopics.empty()) span.categories.insert(Category::kControversial);
  if (span.categories.empty()) fail(record_id, "span '" + span.text + "' has no category");
  return span;
}

}  // namespace

std::set<Category> LlmAnnotation::categories() const {
  std::set<Category> out;
  for (const auto& s : spans) out.insert(s.categories.begin(), s.categories.end());
  return out;
}

std::set<Subtopic> LlmAnnotation::subtopics() const {
  std::set<Subtopic> out;
  for (const auto& s : spans) out.insert(s.subtopics.begin(), s.subtopics.end());
  return out;
}

std::optional<nlohmann::json> extract_json_object(std::string_view text) {
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    auto end = match_object(text, pos);
    if (!end) {
      ++pos;
      continue;
    }
    const auto candidate = text.substr(pos, *end - pos);
    if (auto j = decode_object(candidate)) return j;
    if (auto j = decode_object(repair_separators(candidate))) return j;
    pos = *end;
  }
  return std::nullopt;
}

LlmAnnotation parse_response(std::string_view record_id, std::string_view body_text, const Taxonomy& taxonomy) {
  if (body_text.empty()) fail(record_id, "empty response");
  auto obj = extract_json_object(body_text);
  if (!obj) fail(record_id, "no JSON object in response");

  LlmAnnotation a;
  a.record_id = std::string(record_id);
  a.raw = std::string(body_text);

  auto overall = obj->find("overall_category");
  if (overall == obj->end()) fail(record_id, "missing overall_category");
  if (!overall->is_string()) fail(record_id, "overall_category is not a string");
  auto binary = binary_label_from_string(overall->get<std::string>());
  if (!binary) fail(record_id, "overall_category must be \"toxic\" or \"non-toxic\"");
  a.overall = *binary;

  auto spans = obj->find("spans");
  const bool has_spans = spans != obj->end() && !spans->is_null();
  if (has_spans && !spans->is_array()) fail(record_id, "spans is not a list");

  if (a.overall == BinaryLabel::kNonToxic) {
    if (has_spans && !spans->empty()) fail(record_id, "non-toxic line with spans");
    return a;
  }
  if (!has_spans || spans->empty()) fail(record_id, "toxic line without spans");
  for (const auto& s : *spans) {
    auto span = parse_span(s, record_id, taxonomy);
    if (std::find(a.spans.begin(), a.spans.end(), span) == a.spans.end()) a.spans.push_back(std::move(span));
  }
  a.violations = validate_spans(a.spans);
  return a;
}

ParseOutcome try_parse_response(std::string_view record_id, std::string_view body_text,
                                const Taxonomy& taxonomy) noexcept {
  ParseOutcome out;
  try {
    out.annotation = parse_response(record_id, body_text, taxonomy);
  } catch (const Error& e) {
    out.failure = e.detail();
  } catch (const std::exception& e) {
    out.failure = std::string(record_id) + ": " + e.what();
  } catch (...) {
    out.failure = std::string(record_id) + ": unknown parse error";
  }
  return out;
}

nlohmann::ordered_json to_json(const LlmAnnotation& a) {
  nlohmann::ordered_json j;
  j["overall_category"] = to_string(a.overall);
  if (a.overall == BinaryLabel::kToxic) {
    auto spans = nlohmann::ordered_json::array();
    for (const auto& s : a.spans) {
      nlohmann::ordered_json sj;
      sj["text"] = s.text;
      auto cats = nlohmann::ordered_json::array();
      for (Category c : s.categories) cats.push_back(display_name(c));
      sj["category"] = std::move(cats);
      if (!s.subtopics.empty()) {
        auto subs = nlohmann::ordered_json::array();
        for (Subtopic st : s.subtopics) subs.push_back(display_name(st));
        sj["subtopic"] = std::move(subs);
      }
      spans.push_back(std::move(sj));
    }
    j["spans"] = std::move(spans);
  }
  return j;
}

}  // namespace toxlabel
