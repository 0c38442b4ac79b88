#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "toxlabel/ingest.h"
#include "toxlabel/text.h"

namespace toxlabel {

// Published per-source figures for the transferred dataset, together with the
// original release size and the quoted annotation cost.
struct ReferenceSource {
  std::string_view name;
  std::string_view language;
  std::int64_t original_lines;
  double cost_usd;
  std::int64_t processed_lines;
  Percent pct_discarded;
  Percent original_toxicity;
  Percent processed_toxicity;
  Percent delta;
};

std::span<const ReferenceSource> reference_sources();
const ReferenceSource* find_reference(std::string_view name);

// Lowercase ASCII alphanumerics only: "GERM_EVAL", "germ-eval" and "GermEval" all match.
std::string normalize_source_name(std::string_view name);

struct ReleaseSchema {
  SourceFormat format = SourceFormat::kJsonl;
  std::string source_column = "source";
  // Without a label column only line counts can be reconciled.
  std::optional<std::string> label_column = std::string("final_binary");
  // Values (case-insensitive, trimmed) counted as toxic; everything else is non-toxic.
  std::vector<std::string> toxic_values = {"toxic", "1", "true", "yes"};
};

struct ReleaseCounts {
  std::string source;  // as written in the release
  std::int64_t lines = 0;
  std::optional<std::int64_t> toxic;
};

// Counts per source in first-seen order. Throws Error(kFormatError) when the
// source column is absent from a row.
std::vector<ReleaseCounts> count_release(std::istream& in, const ReleaseSchema& schema);
std::vector<ReleaseCounts> count_release(const std::filesystem::path& path, const ReleaseSchema& schema);

struct ReconcileRow {
  std::string name;
  bool found = false;
  std::int64_t expected_lines = 0;
  std::int64_t observed_lines = 0;
  bool lines_match = false;
  Percent expected_toxicity;
  std::optional<Percent> observed_toxicity;
  std::optional<bool> toxicity_within;  // null when the release has no labels
};

struct ReconcileReport {
  std::vector<ReconcileRow> rows;  // one per reference source, reference order
  std::vector<std::string> unmatched;  // release sources with no reference entry
  bool labels_available = false;
  bool passed = false;
};

// Lines must match exactly; toxicity within `tolerance_hundredths` when labels exist.
ReconcileReport reconcile(std::span<const ReleaseCounts> observed, std::int64_t tolerance_hundredths = 20);

nlohmann::ordered_json to_json(const ReconcileReport& r);

}  // namespace toxlabel
