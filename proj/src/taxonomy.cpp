#include "toxlabel/taxonomy.h"

#include <fstream>

#include "toxlabel/error.h"
#include "toxlabel/text.h"

namespace toxlabel {

namespace {

struct CategoryInfo {
  Category category;
  std::string_view id;
  std::string_view display;
};

struct SubtopicInfo {
  Subtopic subtopic;
  std::string_view id;
  char letter;
  std::string_view display;
};

constexpr std::array<CategoryInfo, kLabelCount> kCategoryTable = {{
    {Category::kThreatsLife, "threats_life", "Threats (Life Threatening)"},
    {Category::kMinorEndangerment, "minor_endangerment", "Minor Endangerment"},
    {Category::kThreatsNonLife, "threats_non_life", "Threats (Non-Life Threatening)"},
    {Category::kHate, "hate", "Hate"},
    {Category::kSexualContent, "sexual_content_harassment", "Sexual Content / Harassment"},
    {Category::kExtremism, "extremism", "Extremism"},
    {Category::kInsults, "insults", "Insults"},
    {Category::kControversial, "controversial", "Controversial / Potentially Toxic Topic"},
    {Category::kNonToxic, "non_toxic", "Non-Toxic"},
}};

constexpr std::array<SubtopicInfo, kSubtopicCount> kSubtopicTable = {{
    {Subtopic::kAbortion, "abortion", 'a', "Abortion"},
    {Subtopic::kReligion, "religion", 'b', "Religion"},
    {Subtopic::kPolitics, "politics", 'c', "Politics"},
    {Subtopic::kVulgarContent, "vulgar_content", 'd', "Vulgar Content"},
    {Subtopic::kShockingContent, "shocking_disgusting_content", 'e', "Shocking / Disgusting Content"},
    {Subtopic::kHardDrugs, "hard_drugs", 'f', "Hard Drugs"},
    {Subtopic::kAlcohol, "alcohol", 'g', "Alcohol"},
    {Subtopic::kPii, "pii", 'h', "PII"},
    {Subtopic::kTrolling, "trolling", 'i', "Trolling"},
    {Subtopic::kCheating, "cheating", 'j', "Cheating"},
    {Subtopic::kScamsAndAds, "scams_and_advertisements", 'k', "Scams and Advertisements"},
    {Subtopic::kSpamming, "spamming", 'l', "Spamming"},
    {Subtopic::kCompetitors, "competitors", 'm', "Competitors"},
    {Subtopic::kOtherOffensive, "other_offensive_content", 'n', "Other Offensive Content"},
}};

// Built-in spellings for the distinguished negative label.
constexpr std::array<std::string_view, 2> kNonToxicAliases = {"non toxic", "nontoxic"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_tight(char c) { return c == '/' || c == '(' || c == ')'; }

}  // namespace

std::string_view to_string(BinaryLabel label) {
  return label == BinaryLabel::kToxic ? "toxic" : "non-toxic";
}

std::optional<BinaryLabel> binary_label_from_string(std::string_view s) {
  if (s == "toxic") return BinaryLabel::kToxic;
  if (s == "non-toxic") return BinaryLabel::kNonToxic;
  return std::nullopt;
}

std::string_view display_name(Category c) { return kCategoryTable[index_of(c)].display; }
std::string_view display_name(Subtopic s) { return kSubtopicTable[static_cast<std::size_t>(s)].display; }
std::string_view id_of(Category c) { return kCategoryTable[index_of(c)].id; }
std::string_view id_of(Subtopic s) { return kSubtopicTable[static_cast<std::size_t>(s)].id; }

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kThreatExclusivity: return "ExclusivityViolation";
    case ViolationKind::kMissingSubtopic: return "MissingSubtopic";
    case ViolationKind::kSubtopicWithoutControversial: return "SubtopicWithoutControversial";
    case ViolationKind::kExtremismWithoutPolitics: return "ExtremismWithoutPolitics";
  }
  return "Unknown";
}

std::string normalize_label(std::string_view text) {
  const std::string lowered = ascii_lower(trim(text));
  std::string out;
  out.reserve(lowered.size());
  bool pending_space = false;
  for (char c : lowered) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty() && !is_tight(c) && !is_tight(out.back())) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

Taxonomy::Taxonomy() {
  for (const auto& info : kCategoryTable) {
    add_category_alias(info.display, info.category);
    add_category_alias(info.id, info.category);
  }
  for (auto alias : kNonToxicAliases) add_category_alias(alias, Category::kNonToxic);
  for (const auto& info : kSubtopicTable) {
    add_subtopic_alias(info.display, info.subtopic);
    add_subtopic_alias(info.id, info.subtopic);
  }
}

void Taxonomy::add_category_alias(std::string_view alias, Category c) {
  auto key = normalize_label(alias);
  if (key.empty()) throw Error(ErrorCode::kInvalidTaxonomy, "empty category alias");
  auto [it, inserted] = category_keys_.emplace(key, c);
  if (!inserted && it->second != c) {
    throw Error(ErrorCode::kInvalidTaxonomy, "alias '" + std::string(alias) + "' already names another category");
  }
  if (subtopic_keys_.contains(key)) {
    throw Error(ErrorCode::kInvalidTaxonomy, "alias '" + std::string(alias) + "' collides with a subtopic");
  }
}

void Taxonomy::add_subtopic_alias(std::string_view alias, Subtopic s) {
  auto key = normalize_label(alias);
  if (key.empty()) throw Error(ErrorCode::kInvalidTaxonomy, "empty subtopic alias");
  auto [it, inserted] = subtopic_keys_.emplace(key, s);
  if (!inserted && it->second != s) {
    throw Error(ErrorCode::kInvalidTaxonomy, "alias '" + std::string(alias) + "' already names another subtopic");
  }
  if (category_keys_.contains(key)) {
    throw Error(ErrorCode::kInvalidTaxonomy, "alias '" + std::string(alias) + "' collides with a category");
  }
}

const Taxonomy& Taxonomy::builtin() {
  static const Taxonomy instance;
  return instance;
}

Taxonomy Taxonomy::from_json(const nlohmann::json& doc) {
  auto fail = [](const std::string& why) { return Error(ErrorCode::kInvalidTaxonomy, why); };
  try {
    if (!doc.is_object()) throw fail("taxonomy document must be an object");
    if (doc.value("version", 0) != kSchemaVersion) {
      throw fail("unsupported taxonomy schema version");
    }
    Taxonomy t;
    const auto& cats = doc.at("categories");
    if (!cats.is_array() || cats.size() != kLabelCount) {
      throw fail("taxonomy must list exactly 9 categories; categories cannot be removed");
    }
    std::set<Category> seen;
    for (const auto& entry : cats) {
      const auto id = entry.at("id").get<std::string>();
      const CategoryInfo* info = nullptr;
      for (const auto& ci : kCategoryTable) {
        if (ci.id == id) info = &ci;
      }
      if (info == nullptr) throw fail("unknown category id '" + id + "'");
      if (!seen.insert(info->category).second) throw fail("duplicate category id '" + id + "'");
      if (entry.at("display_name").get<std::string>() != info->display) {
        throw fail("display_name of '" + id + "' must be '" + std::string(info->display) + "'");
      }
      const auto& rank = entry.at("severity_rank");
      if (is_toxic(info->category)) {
        if (!rank.is_number_integer() || rank.get<int>() != severity_rank(info->category)) {
          throw fail("severity_rank of '" + id + "' must be " + std::to_string(severity_rank(info->category)));
        }
      } else if (!rank.is_null()) {
        throw fail("Non-Toxic has no severity_rank");
      }
      for (const auto& alias : entry.value("aliases", nlohmann::json::array())) {
        const auto a = alias.get<std::string>();
        t.add_category_alias(a, info->category);
        t.extra_category_aliases_[info->category].push_back(a);
      }
    }
    const auto& subs = doc.at("subtopics");
    if (!subs.is_array() || subs.size() != kSubtopicCount) {
      throw fail("taxonomy must list exactly 14 subtopics");
    }
    std::set<Subtopic> seen_sub;
    for (const auto& entry : subs) {
      const auto id = entry.at("id").get<std::string>();
      const SubtopicInfo* info = nullptr;
      for (const auto& si : kSubtopicTable) {
        if (si.id == id) info = &si;
      }
      if (info == nullptr) throw fail("unknown subtopic id '" + id + "'");
      if (!seen_sub.insert(info->subtopic).second) throw fail("duplicate subtopic id '" + id + "'");
      if (entry.at("display_name").get<std::string>() != info->display) {
        throw fail("display_name of subtopic '" + id + "' must be '" + std::string(info->display) + "'");
      }
      for (const auto& alias : entry.value("aliases", nlohmann::json::array())) {
        const auto a = alias.get<std::string>();
        t.add_subtopic_alias(a, info->subtopic);
        t.extra_subtopic_aliases_[info->subtopic].push_back(a);
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("malformed taxonomy document: ") + e.what());
  }
}

Taxonomy Taxonomy::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidTaxonomy, "cannot open taxonomy file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidTaxonomy, path + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json Taxonomy::to_json() const {
  nlohmann::ordered_json doc;
  doc["version"] = kSchemaVersion;
  doc["name"] = "prompt-v1";
  auto cats = nlohmann::ordered_json::array();
  for (const auto& info : kCategoryTable) {
    nlohmann::ordered_json e;
    e["id"] = info.id;
    e["display_name"] = info.display;
    e["severity_rank"] = is_toxic(info.category) ? nlohmann::ordered_json(severity_rank(info.category))
                                                 : nlohmann::ordered_json(nullptr);
    auto it = extra_category_aliases_.find(info.category);
    e["aliases"] = it == extra_category_aliases_.end() ? std::vector<std::string>{} : it->second;
    cats.push_back(std::move(e));
  }
  doc["categories"] = std::move(cats);
  auto subs = nlohmann::ordered_json::array();
  for (const auto& info : kSubtopicTable) {
    nlohmann::ordered_json e;
    e["id"] = info.id;
    e["letter"] = std::string(1, info.letter);
    e["display_name"] = info.display;
    auto it = extra_subtopic_aliases_.find(info.subtopic);
    e["aliases"] = it == extra_subtopic_aliases_.end() ? std::vector<std::string>{} : it->second;
    subs.push_back(std::move(e));
  }
  doc["subtopics"] = std::move(subs);
  return nlohmann::json::parse(doc.dump());
}

std::optional<Category> Taxonomy::find_category(std::string_view label_text) const {
  auto it = category_keys_.find(normalize_label(label_text));
  if (it == category_keys_.end()) return std::nullopt;
  return it->second;
}

Category Taxonomy::parse_category(std::string_view label_text) const {
  if (trim(label_text).empty()) throw Error(ErrorCode::kUnknownCategory, "empty label");
  if (auto c = find_category(label_text)) return *c;
  throw Error(ErrorCode::kUnknownCategory, std::string(label_text));
}

std::optional<Subtopic> Taxonomy::find_subtopic(std::string_view label_text) const {
  auto it = subtopic_keys_.find(normalize_label(label_text));
  if (it == subtopic_keys_.end()) return std::nullopt;
  return it->second;
}

Subtopic Taxonomy::parse_subtopic(std::string_view label_text) const {
  if (auto s = find_subtopic(label_text)) return *s;
  throw Error(ErrorCode::kUnknownSubtopic, std::string(label_text));
}

Category parse_category(std::string_view label_text) { return Taxonomy::builtin().parse_category(label_text); }
Subtopic parse_subtopic(std::string_view label_text) { return Taxonomy::builtin().parse_subtopic(label_text); }

int severity_rank(Category c) {
  if (!is_toxic(c)) throw Error(ErrorCode::kNotToxic, "Non-Toxic has no severity rank");
  return static_cast<int>(index_of(c)) + 1;
}

Category primary_category(const std::set<Category>& categories) {
  for (Category c : categories) {
    if (is_toxic(c)) return c;  // std::set iterates in severity order
  }
  throw Error(ErrorCode::kNotToxic, "no toxic category in set");
}

std::vector<Violation> validate_spans(const std::vector<SpanLabel>& spans) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    const bool controversial = s.categories.contains(Category::kControversial);
    if (s.categories.contains(Category::kThreatsLife) && s.categories.contains(Category::kThreatsNonLife)) {
      out.push_back({ViolationKind::kThreatExclusivity, ViolationSeverity::kHard, i});
    }
    if (controversial && s.subtopics.empty()) {
      out.push_back({ViolationKind::kMissingSubtopic, ViolationSeverity::kHard, i});
    }
    if (!controversial && !s.subtopics.empty()) {
      out.push_back({ViolationKind::kSubtopicWithoutControversial, ViolationSeverity::kHard, i});
    }
    if (s.categories.contains(Category::kExtremism) && !s.subtopics.contains(Subtopic::kPolitics)) {
      out.push_back({ViolationKind::kExtremismWithoutPolitics, ViolationSeverity::kSoft, i});
    }
  }
  return out;
}

}  // namespace toxlabel
