#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace toxlabel {

// Enumerators are declared in the moderation prompt's listing order, which is
// also the severity order (most severe first).
enum class Category : std::uint8_t {
  kThreatsLife,
  kMinorEndangerment,
  kThreatsNonLife,
  kHate,
  kSexualContent,
  kExtremism,
  kInsults,
  kControversial,
  kNonToxic,
};

inline constexpr std::size_t kToxicCategoryCount = 8;
inline constexpr std::size_t kLabelCount = 9;  // toxic categories + Non-Toxic

inline constexpr std::array<Category, kToxicCategoryCount> kToxicCategories = {
    Category::kThreatsLife, Category::kMinorEndangerment, Category::kThreatsNonLife,
    Category::kHate,        Category::kSexualContent,     Category::kExtremism,
    Category::kInsults,     Category::kControversial,
};

inline constexpr std::array<Category, kLabelCount> kAllLabels = {
    Category::kThreatsLife, Category::kMinorEndangerment, Category::kThreatsNonLife,
    Category::kHate,        Category::kSexualContent,     Category::kExtremism,
    Category::kInsults,     Category::kControversial,     Category::kNonToxic,
};

// Refinements a..n of the Controversial / Potentially Toxic Topic category.
enum class Subtopic : std::uint8_t {
  kAbortion,
  kReligion,
  kPolitics,
  kVulgarContent,
  kShockingContent,
  kHardDrugs,
  kAlcohol,
  kPii,
  kTrolling,
  kCheating,
  kScamsAndAds,
  kSpamming,
  kCompetitors,
  kOtherOffensive,
};

inline constexpr std::size_t kSubtopicCount = 14;

enum class BinaryLabel : std::uint8_t { kToxic, kNonToxic };

std::string_view to_string(BinaryLabel label);  // "toxic" / "non-toxic"
std::optional<BinaryLabel> binary_label_from_string(std::string_view s);

constexpr bool is_toxic(Category c) { return c != Category::kNonToxic; }
constexpr std::size_t index_of(Category c) { return static_cast<std::size_t>(c); }

// Canonical display names exactly as spelled in the moderation prompt.
std::string_view display_name(Category c);
std::string_view display_name(Subtopic s);
// Stable machine identifiers used in config files ("threats_life", "politics", ...).
std::string_view id_of(Category c);
std::string_view id_of(Subtopic s);

// Lookup key used for label matching: ASCII case-fold, whitespace runs collapsed,
// no spaces around '/', after '(' or before/around ')' and '('.
// "Sexual Content/ Harassment" and "sexual content / harassment" share a key.
std::string normalize_label(std::string_view text);

struct SpanLabel {
  std::string text;
  std::set<Category> categories;  // toxic only
  std::set<Subtopic> subtopics;

  friend bool operator==(const SpanLabel&, const SpanLabel&) = default;
};

enum class ViolationKind {
  kThreatExclusivity,      // both threat categories on one span
  kMissingSubtopic,        // Controversial without any subtopic
  kSubtopicWithoutControversial,
  kExtremismWithoutPolitics,
};

enum class ViolationSeverity { kHard, kSoft };

struct Violation {
  ViolationKind kind;
  ViolationSeverity severity;
  std::size_t span_index;

  friend bool operator==(const Violation&, const Violation&) = default;
};

std::string_view to_string(ViolationKind kind);

// The organization's label set plus user-supplied alias strings. Categories and
// subtopics are fixed; a taxonomy document may only add aliases.
class Taxonomy {
 public:
  static constexpr int kSchemaVersion = 1;

  // The built-in taxonomy with no extra aliases.
  static const Taxonomy& builtin();

  // Loads a versioned taxonomy document; throws Error(kInvalidTaxonomy) if the
  // document renames, drops or re-ranks anything.
  static Taxonomy from_json(const nlohmann::json& doc);
  static Taxonomy from_file(const std::string& path);

  nlohmann::json to_json() const;

  // Throws Error(kUnknownCategory).
  Category parse_category(std::string_view label_text) const;
  std::optional<Category> find_category(std::string_view label_text) const;

  // Throws Error(kUnknownSubtopic).
  Subtopic parse_subtopic(std::string_view label_text) const;
  std::optional<Subtopic> find_subtopic(std::string_view label_text) const;

  const std::map<std::string, Category>& category_aliases() const { return category_keys_; }

 private:
  Taxonomy();
  void add_category_alias(std::string_view alias, Category c);
  void add_subtopic_alias(std::string_view alias, Subtopic s);

  std::map<std::string, Category> category_keys_;
  std::map<std::string, Subtopic> subtopic_keys_;
  std::map<Category, std::vector<std::string>> extra_category_aliases_;
  std::map<Subtopic, std::vector<std::string>> extra_subtopic_aliases_;
};

// Convenience wrappers over Taxonomy::builtin().
Category parse_category(std::string_view label_text);
Subtopic parse_subtopic(std::string_view label_text);

// 1 = most severe. Throws Error(kNotToxic) for Non-Toxic.
int severity_rank(Category c);

// Most severe member of a non-empty toxic set.
Category primary_category(const std::set<Category>& categories);

// Pure; violations are returned in span order, then rule order.
std::vector<Violation> validate_spans(const std::vector<SpanLabel>& spans);

}  // namespace toxlabel
