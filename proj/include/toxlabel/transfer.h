#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "toxlabel/annotator.h"
#include "toxlabel/ingest.h"
#include "toxlabel/parse.h"
#include "toxlabel/prompting.h"
#include "toxlabel/text.h"

namespace toxlabel {

enum class Verdict { kKept, kDiscarded };
enum class DiscardReason { kDisagreement, kParseFailure, kApiFailure };

std::string_view to_string(Verdict v);
std::string_view to_string(DiscardReason r);

struct Provenance {
  std::string model = "gpt-4o-mini";
  PromptVersion prompt_version = PromptVersion::kV1;
  double temperature = 0.7;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// What came back from the annotator for one record.
struct AnnotationOutcome {
  enum class Kind { kAnnotated, kParseFailure, kApiFailure };

  Kind kind = Kind::kApiFailure;
  std::optional<LlmAnnotation> annotation;
  std::string detail;  // failure message
  std::string raw;     // body text, when one was received

  static AnnotationOutcome annotated(LlmAnnotation a);
  static AnnotationOutcome parse_failure(std::string detail, std::string raw);
  static AnnotationOutcome api_failure(std::string detail);
};

using OutcomeMap = std::map<std::string, AnnotationOutcome, std::less<>>;

// Parses every ok response; api failures pass through as such.
OutcomeMap outcomes_from_responses(std::span<const RawResponse> responses,
                                   const Taxonomy& taxonomy = Taxonomy::builtin());

struct TransferredRecord {
  ChatRecord record;
  std::optional<LlmAnnotation> llm;
  Verdict verdict = Verdict::kDiscarded;
  std::optional<DiscardReason> discard_reason;
  std::string discard_detail;
  std::string raw_response;
  std::optional<BinaryLabel> final_binary;  // kept only
  std::set<Category> final_categories;      // kept and toxic only: union of span categories
  std::set<Subtopic> final_subtopics;
  Provenance provenance;
};

struct Partition {
  std::vector<TransferredRecord> kept;       // ordered by record id
  std::vector<TransferredRecord> discarded;  // ordered by record id
};

// Keeps a record iff its human binary label equals the annotator's overall
// label. Throws Error(kMissingAnnotation) when a record has no outcome and
// Error(kDuplicateRecordId) when two records share an id.
Partition apply_agreement_filter(std::span<const ChatRecord> records, const OutcomeMap& outcomes,
                                 const Provenance& provenance = {});

struct SourceStats {
  std::string source;
  std::int64_t original_lines = 0;
  std::int64_t annotated_lines = 0;  // api successes, including parse failures
  std::int64_t processed_lines = 0;  // kept
  std::optional<Percent> pct_discarded;               // against original_lines
  std::optional<Percent> pct_discarded_of_annotated;  // against annotated_lines
  std::optional<Percent> original_toxicity;
  std::optional<Percent> processed_toxicity;
  std::optional<Percent> delta;  // processed - original, in points
};

// `original_counts` gives the raw line count per source; sources absent from it
// use their record count. Rows are ordered by source name. Empty sources yield
// null percentages rather than a division by zero.
std::vector<SourceStats> compute_source_stats(const Partition& partition,
                                              const std::map<std::string, std::int64_t>& original_counts = {});

nlohmann::ordered_json to_json(const SourceStats& s);
nlohmann::ordered_json stats_to_json(std::span<const SourceStats> stats);

// One MLSNT row. Field names are fixed by the published schema.
struct UnifiedRow {
  std::string id;
  std::string source;
  std::string language;
  std::string text;
  std::vector<std::string> context;
  std::string human_binary;
  std::string llm_binary;
  std::string final_binary;
  std::vector<std::string> final_categories;
  std::vector<std::string> subtopics;
  std::string prompt_version;
  double temperature = 0.0;
  std::string model;
  std::optional<nlohmann::json> spans;

  friend bool operator==(const UnifiedRow&, const UnifiedRow&) = default;
};

UnifiedRow to_unified_row(const TransferredRecord& r, bool include_spans = false);
nlohmann::ordered_json to_json(const UnifiedRow& row);
UnifiedRow unified_row_from_json(const nlohmann::json& j);
std::vector<UnifiedRow> read_unified(std::istream& in);

struct EmitOptions {
  bool include_spans = false;
};

struct EmitManifest {
  std::int64_t rows = 0;
  std::map<std::string, std::int64_t> per_source;
  std::map<std::string, std::int64_t> per_language;
  std::string sha256;  // of the bytes written
  bool valid = true;   // false when the sink failed part-way
  std::string error;
};

nlohmann::ordered_json to_json(const EmitManifest& m);

// Writes one JSONL row per kept record. Throws Error(kDataError-class) if a
// discarded record is passed; sink failures mark the manifest invalid.
EmitManifest emit_unified(std::span<const TransferredRecord> kept, std::ostream& sink, const EmitOptions& options = {});

// Sidecar export of discarded records with their reasons, for later review.
EmitManifest emit_discards(std::span<const TransferredRecord> discarded, std::ostream& sink);

}  // namespace toxlabel
