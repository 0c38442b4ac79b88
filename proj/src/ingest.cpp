#include "toxlabel/ingest.h"

#include <cstdio>
#include <fstream>
#include <future>
#include <unordered_set>

#include "toxlabel/csv.h"
#include "toxlabel/error.h"
#include "toxlabel/hashing.h"

namespace toxlabel {

namespace {

// One data row with its columns already pulled out as strings.
struct RawRow {
  std::string text;
  std::string label;
  std::vector<std::string> context;
  std::vector<std::string> speakers;
};

std::vector<std::string> split(std::string_view s, std::string_view sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  if (sep.empty()) {
    out.emplace_back(s);
    return out;
  }
  std::size_t pos = 0;
  for (;;) {
    auto next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.emplace_back(s.substr(pos));
      return out;
    }
    out.emplace_back(s.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

std::string json_scalar_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

std::vector<std::string> json_lines(const nlohmann::json& v, std::string_view sep) {
  if (v.is_null()) return {};
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(json_scalar_to_string(e));
    return out;
  }
  return split(json_scalar_to_string(v), sep);
}

std::vector<std::string> with_speakers(std::vector<std::string> lines, const std::vector<std::string>& speakers,
                                       std::int64_t row) {
  if (speakers.empty()) return lines;
  if (speakers.size() != lines.size()) {
    throw Error(ErrorCode::kFormatError,
                "row " + std::to_string(row) + ": context and context_speakers lengths differ");
  }
  std::map<std::string, int> numbering;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto [it, _] = numbering.emplace(speakers[i], static_cast<int>(numbering.size()) + 1);
    lines[i] = "PLAYER_" + std::to_string(it->second) + ": " + lines[i];
  }
  return lines;
}

class RecordBuilder {
 public:
  explicit RecordBuilder(const SourceDescriptor& d) : d_(d) { result_.report.source = d.name; }

  void add(RawRow row, std::int64_t row_number) {
    const std::int64_t ordinal = result_.report.raw_rows++;
    bool valid = is_valid_utf8(row.text) && is_valid_utf8(row.label);
    for (const auto& c : row.context) valid = valid && is_valid_utf8(c);
    for (const auto& s : row.speakers) valid = valid && is_valid_utf8(s);
    if (!valid) {
      ++result_.report.dropped_invalid_utf8;
      return;
    }
    if (trim(row.text).empty()) {
      ++result_.report.dropped_empty_text;
      return;
    }
    ChatRecord r;
    r.context = with_speakers(std::move(row.context), row.speakers, row_number);
    r.human_binary = binarize(row.label, d_.binarization);
    r.id = make_record_id(d_.name, ordinal, row.text, r.context);
    r.source = d_.name;
    r.language = d_.language;
    r.text = std::move(row.text);
    r.original_label = std::move(row.label);
    result_.records.push_back(std::move(r));
    ++result_.report.loaded;
  }

  LoadResult finish() { return std::move(result_); }

 private:
  const SourceDescriptor& d_;
  LoadResult result_;
};

void load_delimited(const SourceDescriptor& d, std::istream& in, char delim, RecordBuilder& builder) {
  csv::Reader reader(in, delim);
  auto header = reader.next();
  if (!header) return;
  if (!header->fields.empty() && header->fields[0].starts_with("\xEF\xBB\xBF")) {
    header->fields[0].erase(0, 3);
  }
  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header->fields.size(); ++i) {
      if (header->fields[i] == name) return i;
    }
    throw Error(ErrorCode::kFormatError, d.name + ": row 1: missing column '" + name + "'");
  };
  const auto text_col = column(d.columns.text);
  const auto label_col = column(d.columns.label);
  std::optional<std::size_t> ctx_col, spk_col;
  if (d.columns.context) ctx_col = column(*d.columns.context);
  if (d.columns.context_speakers) spk_col = column(*d.columns.context_speakers);

  std::int64_t row_number = 1;
  while (auto row = reader.next()) {
    ++row_number;
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;  // blank line
    if (row->fields.size() != header->fields.size()) {
      throw Error(ErrorCode::kFormatError, d.name + ": row " + std::to_string(row_number) + " (line " +
                                               std::to_string(row->line) + "): expected " +
                                               std::to_string(header->fields.size()) + " fields, got " +
                                               std::to_string(row->fields.size()));
    }
    RawRow raw;
    raw.text = std::move(row->fields[text_col]);
    raw.label = std::move(row->fields[label_col]);
    if (ctx_col) raw.context = split(row->fields[*ctx_col], d.columns.context_separator);
    if (spk_col) raw.speakers = split(row->fields[*spk_col], d.columns.context_separator);
    builder.add(std::move(raw), row_number);
  }
}

void load_jsonl(const SourceDescriptor& d, std::istream& in, RecordBuilder& builder) {
  std::string line;
  std::int64_t row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      // undecodable bytes are a data-quality drop, anything else is malformed
      if (!is_valid_utf8(line)) {
        builder.add(RawRow{std::string("\xFF"), {}, {}, {}}, row_number);
        continue;
      }
      throw Error(ErrorCode::kFormatError, d.name + ": row " + std::to_string(row_number) + ": " + e.what());
    }
    if (!j.is_object()) {
      throw Error(ErrorCode::kFormatError, d.name + ": row " + std::to_string(row_number) + ": not a JSON object");
    }
    auto field = [&](const std::string& name) -> const nlohmann::json& {
      auto it = j.find(name);
      if (it == j.end()) {
        throw Error(ErrorCode::kFormatError,
                    d.name + ": row " + std::to_string(row_number) + ": missing field '" + name + "'");
      }
      return *it;
    };
    RawRow raw;
    raw.text = json_scalar_to_string(field(d.columns.text));
    raw.label = json_scalar_to_string(field(d.columns.label));
    if (d.columns.context && j.contains(*d.columns.context)) {
      raw.context = json_lines(j.at(*d.columns.context), d.columns.context_separator);
    }
    if (d.columns.context_speakers && j.contains(*d.columns.context_speakers)) {
      raw.speakers = json_lines(j.at(*d.columns.context_speakers), d.columns.context_separator);
    }
    builder.add(std::move(raw), row_number);
  }
}

}  // namespace

std::string_view to_string(SourceFormat f) {
  switch (f) {
    case SourceFormat::kCsv: return "csv";
    case SourceFormat::kTsv: return "tsv";
    case SourceFormat::kJsonl: return "jsonl";
  }
  return "csv";
}

SourceFormat source_format_from_string(std::string_view s) {
  if (s == "csv") return SourceFormat::kCsv;
  if (s == "tsv") return SourceFormat::kTsv;
  if (s == "jsonl") return SourceFormat::kJsonl;
  throw Error(ErrorCode::kInvalidRegistry, "unknown source format '" + std::string(s) + "'");
}

BinaryLabel binarize(std::string_view original_label, const BinarizationMap& mapping) {
  auto it = mapping.find(original_label);
  if (it == mapping.end()) throw Error(ErrorCode::kUnmappedLabel, std::string(original_label));
  return it->second;
}

std::string make_record_id(std::string_view source, std::int64_t ordinal, std::string_view text,
                           const std::vector<std::string>& context) {
  Sha256 h;
  h.update(text);
  for (const auto& c : context) {
    h.update("\x1f");
    h.update(c);
  }
  char ord[32];
  std::snprintf(ord, sizeof ord, "%08lld", static_cast<long long>(ordinal));
  return std::string(source) + ":" + ord + ":" + h.hex_digest().substr(0, 12);
}

LoadResult load_source(const SourceDescriptor& descriptor, std::istream& in) {
  RecordBuilder builder(descriptor);
  switch (descriptor.format) {
    case SourceFormat::kCsv: load_delimited(descriptor, in, ',', builder); break;
    case SourceFormat::kTsv: load_delimited(descriptor, in, '\t', builder); break;
    case SourceFormat::kJsonl: load_jsonl(descriptor, in, builder); break;
  }
  return builder.finish();
}

LoadResult load_source(const SourceDescriptor& descriptor) {
  std::ifstream in(descriptor.path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kFileNotFound, descriptor.name + ": cannot open " + descriptor.path.string());
  }
  return load_source(descriptor, in);
}

std::vector<LoadResult> load_sources(std::span<const SourceDescriptor> descriptors) {
  std::vector<std::future<LoadResult>> pending;
  pending.reserve(descriptors.size());
  for (const auto& d : descriptors) {
    pending.push_back(std::async(std::launch::async, [&d] { return load_source(d); }));
  }
  std::vector<LoadResult> out;
  out.reserve(pending.size());
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

Registry Registry::from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  auto fail = [](const std::string& why) { return Error(ErrorCode::kInvalidRegistry, why); };
  try {
    if (!doc.is_object()) throw fail("registry must be a JSON object");
    if (doc.value("version", 0) != kSchemaVersion) throw fail("unsupported registry schema version");
    Registry reg;
    std::unordered_set<std::string> names;
    for (const auto& s : doc.at("sources")) {
      SourceDescriptor d;
      d.name = s.at("name").get<std::string>();
      if (d.name.empty()) throw fail("source with empty name");
      if (!names.insert(d.name).second) throw fail("duplicate source name '" + d.name + "'");
      d.language = s.at("language").get<std::string>();
      d.platform = s.value("platform", "");
      d.path = s.at("path").get<std::string>();
      if (d.path.is_relative()) d.path = base_dir / d.path;
      d.format = source_format_from_string(s.at("format").get<std::string>());
      const auto& cols = s.at("columns");
      d.columns.text = cols.at("text").get<std::string>();
      d.columns.label = cols.at("label").get<std::string>();
      if (cols.contains("context") && !cols.at("context").is_null()) {
        d.columns.context = cols.at("context").get<std::string>();
      }
      if (cols.contains("context_speakers") && !cols.at("context_speakers").is_null()) {
        d.columns.context_speakers = cols.at("context_speakers").get<std::string>();
      }
      d.columns.context_separator = cols.value("context_separator", "\n");
      for (const auto& [label, binary] : s.at("binarization").items()) {
        auto b = binary_label_from_string(binary.get<std::string>());
        if (!b) throw fail(d.name + ": binarization target must be 'toxic' or 'non-toxic'");
        d.binarization.emplace(label, *b);
      }
      if (s.contains("reference_lines") && !s.at("reference_lines").is_null()) {
        d.reference_lines = s.at("reference_lines").get<std::int64_t>();
      }
      reg.sources.push_back(std::move(d));
    }
    return reg;
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("malformed registry: ") + e.what());
  }
}

Registry Registry::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidRegistry, "cannot open registry " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidRegistry, path.string() + ": " + e.what());
  }
  return from_json(doc, path.parent_path());
}

const SourceDescriptor* Registry::find(std::string_view name) const {
  for (const auto& s : sources) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

RegistryRow registry_row(const LoadResult& loaded, const SourceDescriptor& descriptor) {
  RegistryRow row;
  row.name = descriptor.name;
  row.language = descriptor.language;
  row.lines = static_cast<std::int64_t>(loaded.records.size());
  for (const auto& r : loaded.records) {
    if (r.human_binary == BinaryLabel::kToxic) ++row.toxic;
  }
  if (row.lines > 0) row.toxicity = Percent::from_ratio(row.toxic, row.lines);
  return row;
}

std::vector<RegistryRow> registry_report(std::span<const SourceDescriptor> descriptors) {
  auto loaded = load_sources(descriptors);
  std::vector<RegistryRow> rows;
  rows.reserve(loaded.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) rows.push_back(registry_row(loaded[i], descriptors[i]));
  return rows;
}

nlohmann::ordered_json to_json(const ChatRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["source"] = r.source;
  j["language"] = r.language;
  j["text"] = r.text;
  j["context"] = r.context;
  j["original_label"] = r.original_label;
  j["human_binary"] = to_string(r.human_binary);
  return j;
}

ChatRecord chat_record_from_json(const nlohmann::json& j) {
  try {
    ChatRecord r;
    r.id = j.at("id").get<std::string>();
    r.source = j.at("source").get<std::string>();
    r.language = j.at("language").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.context = j.at("context").get<std::vector<std::string>>();
    r.original_label = j.at("original_label").get<std::string>();
    auto b = binary_label_from_string(j.at("human_binary").get<std::string>());
    if (!b) throw Error(ErrorCode::kFormatError, "human_binary must be 'toxic' or 'non-toxic'");
    r.human_binary = *b;
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("malformed ChatRecord: ") + e.what());
  }
}

void write_records_jsonl(std::ostream& out, std::span<const ChatRecord> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<ChatRecord> read_records_jsonl(std::istream& in) {
  std::vector<ChatRecord> out;
  std::string line;
  std::int64_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(chat_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kFormatError, "row " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace toxlabel
