#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "toxlabel/parse.h"
#include "toxlabel/taxonomy.h"

namespace toxlabel {

enum class Averaging { kMacro, kWeighted, kPerClass };

// Whether classes with no gold support take part in the macro mean.
enum class ZeroSupport { kExclude, kIncludeAsZero };

struct ClassScore {
  std::string label;
  std::int64_t true_positive = 0;
  std::int64_t predicted = 0;  // tp + fp
  std::int64_t support = 0;    // tp + fn
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;  // 0 when precision + recall == 0
};

struct F1Report {
  std::vector<ClassScore> per_class;  // declared class order
  double macro = 0.0;
  double weighted = 0.0;  // support-weighted over gold
  std::int64_t total = 0;

  // kPerClass is not a scalar; use per_class instead.
  double score(Averaging averaging) const;
};

// Labels are indices into a declared class set of size num_classes.
// Throws Error(kEmptyInput) on empty input, Error(kShapeMismatch) on length
// mismatch and Error(kLabelMismatch) for an index outside the class set.
F1Report f1_scores(std::span<const int> gold, std::span<const int> pred, std::size_t num_classes,
                   ZeroSupport zero_support = ZeroSupport::kExclude);

// String labels. With an empty `classes` the class set is the sorted union of
// labels seen in gold and pred.
F1Report f1_scores(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                   std::vector<std::string> classes = {}, ZeroSupport zero_support = ZeroSupport::kExclude);

// Flattens every sequence into token pairs. Throws Error(kShapeMismatch) naming
// the first sequence whose lengths differ.
F1Report token_f1(const std::vector<std::vector<std::string>>& gold, const std::vector<std::vector<std::string>>& pred,
                  std::vector<std::string> classes = {}, ZeroSupport zero_support = ZeroSupport::kExclude);

// Line-level class used for category comparison: Non-Toxic, or the most severe
// category of a toxic line.
Category line_label(BinaryLabel binary, const std::set<Category>& categories);

struct GoldRecord {
  std::string id;
  BinaryLabel binary = BinaryLabel::kNonToxic;
  std::set<Category> categories;  // empty for non-toxic lines
};

// Which records the LLM "Toxic" subset conditions on.
enum class ToxicConditioning { kPredicted, kGold };

struct SubsetScore {
  std::int64_t size = 0;
  std::optional<double> weighted_f1;  // null for an empty subset
};

struct FilterReport {
  SubsetScore no_filter;      // all evaluated records
  SubsetScore llm_toxic;      // predicted binary toxic (or gold toxic, see conditioning)
  SubsetScore agreed_toxic;   // gold and predicted binary both toxic
  SubsetScore agreed_labels;  // gold binary == predicted binary
  std::optional<double> binary_weighted_f1;  // over all evaluated records
  std::int64_t excluded = 0;                 // records without an annotation
  ToxicConditioning conditioning = ToxicConditioning::kPredicted;
};

FilterReport filtered_evaluation(std::span<const GoldRecord> records,
                                 const std::map<std::string, LlmAnnotation, std::less<>>& annotations,
                                 ToxicConditioning conditioning = ToxicConditioning::kPredicted);

nlohmann::ordered_json to_json(const F1Report& r);
nlohmann::ordered_json to_json(const FilterReport& r);

// Aligned plain-text table with the four subsets as columns; scores as
// percentages rounded half-up to 2 decimals.
std::string format_filter_table(const FilterReport& r);
std::string format_f1_table(const F1Report& r);

// Mean of per-game scores, as in an "Overall" column.
double mean_score(std::span<const double> scores);

}  // namespace toxlabel
