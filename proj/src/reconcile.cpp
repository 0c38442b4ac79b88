#include "toxlabel/reconcile.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include "toxlabel/csv.h"
#include "toxlabel/error.h"

namespace toxlabel {

namespace {

// name, language, original lines, cost, processed lines, % discarded,
// original toxicity, processed toxicity, delta (all percentages in hundredths)
constexpr ReferenceSource kReference[] = {
    {"COLD", "Chinese (Simplified)", 37480, 3.64, 20087, {4618}, {4803}, {6067}, {1264}},
    {"SWSR", "Chinese (Simplified)", 8969, 0.89, 5708, {3632}, {3450}, {4785}, {1335}},
    {"TOXICN", "Chinese (Simplified)", 12011, 1.15, 8500, {2923}, {5379}, {5651}, {271}},
    {"TOCAB", "Chinese (Traditional)", 104002, 9.78, 65263, {3725}, {1448}, {894}, {-554}},
    {"MLMA", "French", 4014, 0.38, 3203, {2020}, {7955}, {9357}, {1402}},
    {"GAHD", "German", 10996, 1.04, 7886, {2828}, {4243}, {5588}, {1345}},
    {"GERM_EVAL", "German", 8407, 0.81, 4546, {4593}, {3376}, {5370}, {1994}},
    {"HASOC", "German", 4669, 0.45, 1431, {6935}, {1163}, {3242}, {2079}},
    {"Inspection AI", "Japanese", 437, 0.04, 324, {2586}, {3593}, {1698}, {-1895}},
    {"LLM_JP", "Japanese", 1847, 0.51, 1662, {1002}, {4472}, {4543}, {71}},
    {"OffCom", "Portuguese (Brazil)", 1033, 0.10, 577, {4414}, {1955}, {2686}, {731}},
    {"OLID", "Portuguese (Brazil)", 6952, 0.66, 5534, {2040}, {8539}, {9400}, {862}},
    {"ToLD", "Portuguese (Brazil)", 21000, 1.99, 15065, {2826}, {4407}, {4998}, {591}},
    {"Abusive", "Russian", 2000, 0.20, 1184, {4080}, {3270}, {5397}, {2127}},
    {"South_Park", "Russian", 15875, 1.57, 13155, {1713}, {3283}, {3269}, {-14}},
};

bool is_toxic_value(std::string_view raw, const std::vector<std::string>& toxic_values) {
  const std::string v = ascii_lower(trim(raw));
  return std::find(toxic_values.begin(), toxic_values.end(), v) != toxic_values.end();
}

std::string scalar_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  return v.dump();
}

class Counter {
 public:
  explicit Counter(const ReleaseSchema& schema) : schema_(schema) {}

  void add(const std::string& source, const std::optional<std::string>& label) {
    auto [it, inserted] = index_.emplace(source, counts_.size());
    if (inserted) {
      counts_.push_back({source, 0, schema_.label_column ? std::optional<std::int64_t>(0) : std::nullopt});
    }
    auto& c = counts_[it->second];
    ++c.lines;
    if (label) labelled_.insert(source);
    if (c.toxic && label && is_toxic_value(*label, schema_.toxic_values)) ++*c.toxic;
  }

  // A source whose rows never carried the label column has no toxicity.
  std::vector<ReleaseCounts> take() {
    for (auto& c : counts_) {
      if (!labelled_.contains(c.source)) c.toxic.reset();
    }
    return std::move(counts_);
  }

 private:
  const ReleaseSchema& schema_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<ReleaseCounts> counts_;
  std::set<std::string, std::less<>> labelled_;
};

}  // namespace

std::span<const ReferenceSource> reference_sources() { return kReference; }

std::string normalize_source_name(std::string_view name) {
  std::string out;
  for (unsigned char c : name) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

const ReferenceSource* find_reference(std::string_view name) {
  const std::string key = normalize_source_name(name);
  for (const auto& r : kReference) {
    if (normalize_source_name(r.name) == key) return &r;
  }
  return nullptr;
}

std::vector<ReleaseCounts> count_release(std::istream& in, const ReleaseSchema& schema) {
  Counter counter(schema);
  if (schema.format == SourceFormat::kJsonl) {
    std::string line;
    std::int64_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (trim(line).empty()) continue;
      nlohmann::json row;
      try {
        row = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kFormatError, "release line " + std::to_string(n) + ": " + e.what());
      }
      if (!row.is_object() || !row.contains(schema.source_column)) {
        throw Error(ErrorCode::kFormatError, "release line " + std::to_string(n) + " lacks '" + schema.source_column + "'");
      }
      std::optional<std::string> label;
      if (schema.label_column && row.contains(*schema.label_column)) label = scalar_string(row.at(*schema.label_column));
      counter.add(scalar_string(row.at(schema.source_column)), label);
    }
    return counter.take();
  }

  csv::Reader reader(in, schema.format == SourceFormat::kTsv ? '\t' : ',');
  auto header = reader.next();
  if (!header) return {};
  if (!header->fields.empty() && header->fields[0].starts_with("\xEF\xBB\xBF")) header->fields[0].erase(0, 3);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header->fields.begin(), header->fields.end(), name);
    if (it == header->fields.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header->fields.begin());
  };
  const auto source_col = column(schema.source_column);
  if (!source_col) throw Error(ErrorCode::kFormatError, "release header lacks '" + schema.source_column + "'");
  const auto label_col = schema.label_column ? column(*schema.label_column) : std::nullopt;
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && row->fields[0].empty()) continue;
    if (*source_col >= row->fields.size()) {
      throw Error(ErrorCode::kFormatError, "release line " + std::to_string(row->line) + " is short");
    }
    std::optional<std::string> label;
    if (label_col && *label_col < row->fields.size()) label = row->fields[*label_col];
    counter.add(row->fields[*source_col], label);
  }
  return counter.take();
}

std::vector<ReleaseCounts> count_release(const std::filesystem::path& path, const ReleaseSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return count_release(in, schema);
}

ReconcileReport reconcile(std::span<const ReleaseCounts> observed, std::int64_t tolerance_hundredths) {
  ReconcileReport report;
  std::map<std::string, const ReleaseCounts*, std::less<>> by_name;
  for (const auto& c : observed) {
    if (!find_reference(c.source)) {
      report.unmatched.push_back(c.source);
      continue;
    }
    by_name[normalize_source_name(c.source)] = &c;
  }

  report.labels_available = !observed.empty() && std::all_of(observed.begin(), observed.end(),
                                                             [](const ReleaseCounts& c) { return c.toxic.has_value(); });
  bool ok = true;
  for (const auto& ref : kReference) {
    ReconcileRow row;
    row.name = std::string(ref.name);
    row.expected_lines = ref.processed_lines;
    row.expected_toxicity = ref.processed_toxicity;
    auto it = by_name.find(normalize_source_name(ref.name));
    if (it != by_name.end()) {
      const ReleaseCounts& c = *it->second;
      row.found = true;
      row.observed_lines = c.lines;
      row.lines_match = c.lines == ref.processed_lines;
      if (c.toxic && c.lines > 0) {
        row.observed_toxicity = Percent::from_ratio(*c.toxic, c.lines);
        const auto diff = row.observed_toxicity->hundredths - ref.processed_toxicity.hundredths;
        row.toxicity_within = (diff < 0 ? -diff : diff) <= tolerance_hundredths;
      }
    }
    ok = ok && row.found && row.lines_match && (!report.labels_available || row.toxicity_within.value_or(false));
    report.rows.push_back(std::move(row));
  }
  report.passed = ok;
  return report;
}

nlohmann::ordered_json to_json(const ReconcileReport& r) {
  nlohmann::ordered_json j;
  j["passed"] = r.passed;
  j["labels_available"] = r.labels_available;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json rj;
    rj["name"] = row.name;
    rj["found"] = row.found;
    rj["expected_lines"] = row.expected_lines;
    rj["observed_lines"] = row.observed_lines;
    rj["lines_match"] = row.lines_match;
    rj["expected_toxicity"] = row.expected_toxicity.to_string();
    rj["observed_toxicity"] =
        row.observed_toxicity ? nlohmann::ordered_json(row.observed_toxicity->to_string()) : nlohmann::ordered_json();
    rj["toxicity_within"] = row.toxicity_within ? nlohmann::ordered_json(*row.toxicity_within) : nlohmann::ordered_json();
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  j["unmatched"] = r.unmatched;
  return j;
}

}  // namespace toxlabel
