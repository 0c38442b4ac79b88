#include "toxlabel/transfer.h"

#include <algorithm>
#include <unordered_set>

#include "toxlabel/error.h"
#include "toxlabel/hashing.h"

namespace toxlabel {

std::string_view to_string(Verdict v) { return v == Verdict::kKept ? "kept" : "discarded"; }

std::string_view to_string(DiscardReason r) {
  switch (r) {
    case DiscardReason::kDisagreement: return "disagreement";
    case DiscardReason::kParseFailure: return "parse_failure";
    case DiscardReason::kApiFailure: return "api_failure";
  }
  return "disagreement";
}

AnnotationOutcome AnnotationOutcome::annotated(LlmAnnotation a) {
  AnnotationOutcome o;
  o.kind = Kind::kAnnotated;
  o.raw = a.raw;
  o.annotation = std::move(a);
  return o;
}

AnnotationOutcome AnnotationOutcome::parse_failure(std::string detail, std::string raw) {
  AnnotationOutcome o;
  o.kind = Kind::kParseFailure;
  o.detail = std::move(detail);
  o.raw = std::move(raw);
  return o;
}

AnnotationOutcome AnnotationOutcome::api_failure(std::string detail) {
  AnnotationOutcome o;
  o.kind = Kind::kApiFailure;
  o.detail = std::move(detail);
  return o;
}

OutcomeMap outcomes_from_responses(std::span<const RawResponse> responses, const Taxonomy& taxonomy) {
  OutcomeMap out;
  for (const auto& r : responses) {
    if (r.status == ResponseStatus::kApiFailure) {
      out.insert_or_assign(r.record_id, AnnotationOutcome::api_failure(r.error));
      continue;
    }
    auto parsed = try_parse_response(r.record_id, r.body_text, taxonomy);
    if (parsed.annotation) {
      out.insert_or_assign(r.record_id, AnnotationOutcome::annotated(std::move(*parsed.annotation)));
    } else {
      out.insert_or_assign(r.record_id, AnnotationOutcome::parse_failure(parsed.failure, r.body_text));
    }
  }
  return out;
}

Partition apply_agreement_filter(std::span<const ChatRecord> records, const OutcomeMap& outcomes,
                                 const Provenance& provenance) {
  std::vector<const ChatRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](const ChatRecord* a, const ChatRecord* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->id == ordered[i - 1]->id) throw Error(ErrorCode::kDuplicateRecordId, ordered[i]->id);
  }

  Partition p;
  for (const ChatRecord* rec : ordered) {
    auto it = outcomes.find(rec->id);
    if (it == outcomes.end()) throw Error(ErrorCode::kMissingAnnotation, rec->id);
    const AnnotationOutcome& o = it->second;

    TransferredRecord t;
    t.record = *rec;
    t.provenance = provenance;
    t.raw_response = o.raw;
    switch (o.kind) {
      case AnnotationOutcome::Kind::kApiFailure:
        t.discard_reason = DiscardReason::kApiFailure;
        t.discard_detail = o.detail;
        break;
      case AnnotationOutcome::Kind::kParseFailure:
        t.discard_reason = DiscardReason::kParseFailure;
        t.discard_detail = o.detail;
        break;
      case AnnotationOutcome::Kind::kAnnotated:
        t.llm = o.annotation;
        if (t.llm->overall == rec->human_binary) {
          t.verdict = Verdict::kKept;
          t.final_binary = rec->human_binary;
          if (*t.final_binary == BinaryLabel::kToxic) {
            t.final_categories = t.llm->categories();
            t.final_subtopics = t.llm->subtopics();
          }
        } else {
          t.discard_reason = DiscardReason::kDisagreement;
        }
        break;
    }
    (t.verdict == Verdict::kKept ? p.kept : p.discarded).push_back(std::move(t));
  }
  return p;
}

namespace {

struct Tally {
  std::int64_t records = 0;
  std::int64_t toxic = 0;
  std::int64_t annotated = 0;
  std::int64_t kept = 0;
  std::int64_t kept_toxic = 0;
};

}  // namespace

std::vector<SourceStats> compute_source_stats(const Partition& partition,
                                              const std::map<std::string, std::int64_t>& original_counts) {
  std::map<std::string, Tally> tallies;
  for (const auto& [source, _] : original_counts) tallies[source];
  auto count = [&](const TransferredRecord& t) {
    Tally& tally = tallies[t.record.source];
    ++tally.records;
    if (t.record.human_binary == BinaryLabel::kToxic) ++tally.toxic;
    if (t.discard_reason != DiscardReason::kApiFailure) ++tally.annotated;
    if (t.verdict == Verdict::kKept) {
      ++tally.kept;
      if (t.final_binary == BinaryLabel::kToxic) ++tally.kept_toxic;
    }
  };
  for (const auto& t : partition.kept) count(t);
  for (const auto& t : partition.discarded) count(t);

  std::vector<SourceStats> out;
  for (const auto& [source, tally] : tallies) {
    SourceStats s;
    s.source = source;
    auto oc = original_counts.find(source);
    s.original_lines = oc == original_counts.end() ? tally.records : oc->second;
    if (s.original_lines < tally.records) {
      throw Error(ErrorCode::kFormatError, source + ": original line count " + std::to_string(s.original_lines) +
                                               " is below the " + std::to_string(tally.records) + " records seen");
    }
    s.annotated_lines = tally.annotated;
    s.processed_lines = tally.kept;
    if (s.original_lines > 0) {
      s.pct_discarded = Percent::from_ratio(s.original_lines - s.processed_lines, s.original_lines);
    }
    if (s.annotated_lines > 0) {
      s.pct_discarded_of_annotated = Percent::from_ratio(s.annotated_lines - s.processed_lines, s.annotated_lines);
    }
    if (tally.records > 0) s.original_toxicity = Percent::from_ratio(tally.toxic, tally.records);
    if (tally.kept > 0) s.processed_toxicity = Percent::from_ratio(tally.kept_toxic, tally.kept);
    if (s.original_toxicity && s.processed_toxicity) s.delta = *s.processed_toxicity - *s.original_toxicity;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

nlohmann::ordered_json percent_json(const std::optional<Percent>& p) {
  return p ? nlohmann::ordered_json(p->value()) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json to_json(const SourceStats& s) {
  nlohmann::ordered_json j;
  j["source"] = s.source;
  j["original_lines"] = s.original_lines;
  j["annotated_lines"] = s.annotated_lines;
  j["processed_lines"] = s.processed_lines;
  j["pct_discarded"] = percent_json(s.pct_discarded);
  j["pct_discarded_of_annotated"] = percent_json(s.pct_discarded_of_annotated);
  j["original_toxicity_pct"] = percent_json(s.original_toxicity);
  j["processed_toxicity_pct"] = percent_json(s.processed_toxicity);
  j["delta"] = percent_json(s.delta);
  return j;
}

nlohmann::ordered_json stats_to_json(std::span<const SourceStats> stats) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : stats) arr.push_back(to_json(s));
  return arr;
}

UnifiedRow to_unified_row(const TransferredRecord& r, bool include_spans) {
  if (r.verdict != Verdict::kKept || !r.llm || !r.final_binary) {
    throw Error(ErrorCode::kFormatError, r.record.id + ": only kept records belong in the unified dataset");
  }
  UnifiedRow row;
  row.id = r.record.id;
  row.source = r.record.source;
  row.language = r.record.language;
  row.text = r.record.text;
  row.context = r.record.context;
  row.human_binary = to_string(r.record.human_binary);
  row.llm_binary = to_string(r.llm->overall);
  row.final_binary = to_string(*r.final_binary);
  for (Category c : r.final_categories) row.final_categories.emplace_back(display_name(c));
  for (Subtopic s : r.final_subtopics) row.subtopics.emplace_back(display_name(s));
  row.prompt_version = to_string(r.provenance.prompt_version);
  row.temperature = r.provenance.temperature;
  row.model = r.provenance.model;
  if (include_spans) {
    auto a = to_json(*r.llm);
    row.spans = a.contains("spans") ? nlohmann::json::parse(a["spans"].dump()) : nlohmann::json::array();
  }
  return row;
}

nlohmann::ordered_json to_json(const UnifiedRow& row) {
  nlohmann::ordered_json j;
  j["id"] = row.id;
  j["source"] = row.source;
  j["language"] = row.language;
  j["text"] = row.text;
  j["context"] = row.context;
  j["human_binary"] = row.human_binary;
  j["llm_binary"] = row.llm_binary;
  j["final_binary"] = row.final_binary;
  j["final_categories"] = row.final_categories;
  j["subtopics"] = row.subtopics;
  j["prompt_version"] = row.prompt_version;
  j["temperature"] = row.temperature;
  j["model"] = row.model;
  if (row.spans) j["spans"] = nlohmann::ordered_json::parse(row.spans->dump());
  return j;
}

UnifiedRow unified_row_from_json(const nlohmann::json& j) {
  try {
    UnifiedRow row;
    row.id = j.at("id").get<std::string>();
    row.source = j.at("source").get<std::string>();
    row.language = j.at("language").get<std::string>();
    row.text = j.at("text").get<std::string>();
    row.context = j.at("context").get<std::vector<std::string>>();
    row.human_binary = j.at("human_binary").get<std::string>();
    row.llm_binary = j.at("llm_binary").get<std::string>();
    row.final_binary = j.at("final_binary").get<std::string>();
    row.final_categories = j.at("final_categories").get<std::vector<std::string>>();
    row.subtopics = j.at("subtopics").get<std::vector<std::string>>();
    row.prompt_version = j.at("prompt_version").get<std::string>();
    row.temperature = j.at("temperature").get<double>();
    row.model = j.at("model").get<std::string>();
    if (j.contains("spans")) row.spans = j.at("spans");
    return row;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("malformed unified row: ") + e.what());
  }
}

std::vector<UnifiedRow> read_unified(std::istream& in) {
  std::vector<UnifiedRow> out;
  std::string line;
  std::int64_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(unified_row_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kFormatError, "unified row " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const EmitManifest& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows;
  j["per_source"] = m.per_source;
  j["per_language"] = m.per_language;
  j["sha256"] = m.sha256;
  j["valid"] = m.valid;
  if (!m.error.empty()) j["error"] = m.error;
  return j;
}

namespace {

template <typename RowFn>
EmitManifest emit_rows(std::span<const TransferredRecord> records, std::ostream& sink, RowFn&& row_json) {
  EmitManifest m;
  Sha256 hash;
  for (const auto& r : records) {
    const std::string line =
        row_json(r).dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) + "\n";
    sink.write(line.data(), static_cast<std::streamsize>(line.size()));
    if (!sink) {
      m.valid = false;
      m.error = "write failed after " + std::to_string(m.rows) + " rows";
      break;
    }
    hash.update(line);
    ++m.rows;
    ++m.per_source[r.record.source];
    ++m.per_language[r.record.language];
  }
  if (m.valid) {
    sink.flush();
    if (!sink) {
      m.valid = false;
      m.error = "flush failed";
    }
  }
  m.sha256 = hash.hex_digest();
  return m;
}

}  // namespace

EmitManifest emit_unified(std::span<const TransferredRecord> kept, std::ostream& sink, const EmitOptions& options) {
  std::vector<UnifiedRow> rows;
  rows.reserve(kept.size());
  for (const auto& r : kept) rows.push_back(to_unified_row(r, options.include_spans));
  std::size_t i = 0;
  return emit_rows(kept, sink, [&](const TransferredRecord&) { return to_json(rows[i++]); });
}

EmitManifest emit_discards(std::span<const TransferredRecord> discarded, std::ostream& sink) {
  return emit_rows(discarded, sink, [](const TransferredRecord& t) {
    nlohmann::ordered_json j;
    j["id"] = t.record.id;
    j["source"] = t.record.source;
    j["language"] = t.record.language;
    j["text"] = t.record.text;
    j["context"] = t.record.context;
    j["original_label"] = t.record.original_label;
    j["human_binary"] = to_string(t.record.human_binary);
    j["llm_binary"] = t.llm ? nlohmann::ordered_json(to_string(t.llm->overall)) : nlohmann::ordered_json(nullptr);
    j["discard_reason"] = t.discard_reason ? to_string(*t.discard_reason) : "";
    j["detail"] = t.discard_detail;
    j["raw_response"] = t.raw_response;
    return j;
  });
}

}  // namespace toxlabel
