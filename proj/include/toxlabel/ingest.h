#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "toxlabel/taxonomy.h"
#include "toxlabel/text.h"

namespace toxlabel {

enum class SourceFormat { kCsv, kTsv, kJsonl };

std::string_view to_string(SourceFormat f);
SourceFormat source_format_from_string(std::string_view s);

using BinarizationMap = std::map<std::string, BinaryLabel, std::less<>>;

struct ColumnMap {
  std::string text;
  std::string label;
  std::optional<std::string> context;
  // Parallel to `context`; when present, context lines are rendered "PLAYER_k: line"
  // with k numbered by first appearance.
  std::optional<std::string> context_speakers;
  // Delimiter between context lines inside a single CSV/TSV cell.
  std::string context_separator = "\n";
};

struct SourceDescriptor {
  std::string name;
  std::string language;
  std::string platform;
  std::filesystem::path path;
  SourceFormat format = SourceFormat::kCsv;
  ColumnMap columns;
  BinarizationMap binarization;
  // Line count of the original release, when known; informational only.
  std::optional<std::int64_t> reference_lines;
};

struct ChatRecord {
  std::string id;
  std::string source;
  std::string language;
  std::string text;
  std::vector<std::string> context;
  std::string original_label;
  BinaryLabel human_binary = BinaryLabel::kNonToxic;

  friend bool operator==(const ChatRecord&, const ChatRecord&) = default;
};

struct LoadReport {
  std::string source;
  std::int64_t raw_rows = 0;
  std::int64_t loaded = 0;
  std::int64_t dropped_empty_text = 0;
  std::int64_t dropped_invalid_utf8 = 0;

  std::int64_t dropped() const { return dropped_empty_text + dropped_invalid_utf8; }
};

struct LoadResult {
  std::vector<ChatRecord> records;
  LoadReport report;
};

// Throws Error(kUnmappedLabel).
BinaryLabel binarize(std::string_view original_label, const BinarizationMap& mapping);

// Stable record id: "<source>:<8-digit row ordinal>:<12 hex of content sha256>".
std::string make_record_id(std::string_view source, std::int64_t ordinal, std::string_view text,
                           const std::vector<std::string>& context);

// Loads one source. Throws Error(kFileNotFound | kFormatError | kUnmappedLabel).
LoadResult load_source(const SourceDescriptor& descriptor);
LoadResult load_source(const SourceDescriptor& descriptor, std::istream& in);

// Loads every source concurrently; results keep descriptor order.
std::vector<LoadResult> load_sources(std::span<const SourceDescriptor> descriptors);

struct Registry {
  static constexpr int kSchemaVersion = 1;

  std::vector<SourceDescriptor> sources;

  // Relative source paths are resolved against the registry file's directory.
  static Registry from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
  static Registry from_file(const std::filesystem::path& path);

  const SourceDescriptor* find(std::string_view name) const;
};

struct RegistryRow {
  std::string name;
  std::string language;
  std::int64_t lines = 0;
  std::int64_t toxic = 0;
  std::optional<Percent> toxicity;  // null for an empty source
};

RegistryRow registry_row(const LoadResult& loaded, const SourceDescriptor& descriptor);
std::vector<RegistryRow> registry_report(std::span<const SourceDescriptor> descriptors);

// Canonical ChatRecord JSONL (fields: id, source, language, text, context,
// original_label, human_binary).
nlohmann::ordered_json to_json(const ChatRecord& r);
ChatRecord chat_record_from_json(const nlohmann::json& j);
void write_records_jsonl(std::ostream& out, std::span<const ChatRecord> records);
std::vector<ChatRecord> read_records_jsonl(std::istream& in);

}  // namespace toxlabel
