#include "toxlabel/softprompt.h"

#include "toxlabel/error.h"
#include "toxlabel/text.h"

namespace toxlabel {

std::string_view to_string(GameToken t) {
  switch (t) {
    case GameToken::kGame1: return "GAME_1";
    case GameToken::kGame2: return "GAME_2";
    case GameToken::kMlsnt: return "MLSNT";
    case GameToken::kGameUnknown: return "GAME_UNKNOWN";
  }
  return "GAME_UNKNOWN";
}

std::optional<GameToken> game_token_from_string(std::string_view s) {
  for (auto t : {GameToken::kGame1, GameToken::kGame2, GameToken::kMlsnt, GameToken::kGameUnknown}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::string_view to_string(Placement p) {
  return p == Placement::kBeforeContext ? "before_context" : "before_current_line";
}

Placement placement_from_string(std::string_view s) {
  if (s == "before_context") return Placement::kBeforeContext;
  if (s == "before_current_line") return Placement::kBeforeCurrentLine;
  throw Error(ErrorCode::kInvalidConfig, "placement must be before_context or before_current_line");
}

std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::kGameToken: return "game_token";
    case SegmentKind::kContextLine: return "context_line";
    case SegmentKind::kSeparator: return "separator";
    case SegmentKind::kCurrentLine: return "current_line";
  }
  return "current_line";
}

std::int64_t default_length_units(std::string_view text) {
  return (static_cast<std::int64_t>(codepoint_count(text)) + 3) / 4;
}

AssembledSequence assemble(std::string_view id, const std::vector<std::string>& context, std::string_view current_line,
                           GameToken token, const AssembleOptions& options) {
  const std::int64_t fixed = options.length_fn(current_line) + 2 * options.special_token_units;
  if (fixed > options.max_len) {
    throw Error(ErrorCode::kCurrentLineTooLong, std::string(id) + ": needs " + std::to_string(fixed) +
                                                    " units, max_len is " + std::to_string(options.max_len));
  }

  // keep the longest suffix (newest lines) of the context that fits
  std::int64_t used = fixed;
  std::size_t first_kept = context.size();
  while (first_kept > 0) {
    const std::int64_t cost = options.length_fn(context[first_kept - 1]);
    if (used + cost > options.max_len) break;
    used += cost;
    --first_kept;
  }

  AssembledSequence out;
  out.id = std::string(id);
  out.token = token;
  out.placement = options.placement;
  out.length_units = used;
  out.context_dropped = first_kept;

  const Segment token_segment{SegmentKind::kGameToken, std::string(to_string(token))};
  if (options.placement == Placement::kBeforeContext) out.segments.push_back(token_segment);
  for (std::size_t i = first_kept; i < context.size(); ++i) {
    out.segments.push_back({SegmentKind::kContextLine, context[i]});
  }
  out.segments.push_back({SegmentKind::kSeparator, std::string(kSeparatorText)});
  if (options.placement == Placement::kBeforeCurrentLine) out.segments.push_back(token_segment);
  out.segments.push_back({SegmentKind::kCurrentLine, std::string(current_line)});
  return out;
}

std::vector<AssembledSequence> build_corpus(std::span<const CorpusRecord> records,
                                            const std::map<std::string, GameToken, std::less<>>& token_map,
                                            const AssembleOptions& options, std::optional<GameToken> override_token) {
  std::vector<AssembledSequence> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    GameToken token;
    if (override_token) {
      token = *override_token;
    } else {
      auto it = token_map.find(r.origin);
      if (it == token_map.end()) throw Error(ErrorCode::kUnmappedOrigin, r.origin);
      token = it->second;
    }
    auto seq = assemble(r.id, r.context, r.text, token, options);
    seq.labels = r.labels;
    out.push_back(std::move(seq));
  }
  return out;
}

nlohmann::ordered_json to_json(const AssembledSequence& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["token"] = to_string(s.token);
  auto segs = nlohmann::ordered_json::array();
  for (const auto& seg : s.segments) {
    nlohmann::ordered_json sj;
    sj["kind"] = to_string(seg.kind);
    sj["text"] = seg.text;
    segs.push_back(std::move(sj));
  }
  j["segments"] = std::move(segs);
  j["labels"] = s.labels;
  return j;
}

CorpusRecord corpus_record_from_json(const nlohmann::json& j) {
  try {
    CorpusRecord r;
    r.id = j.at("id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    if (j.contains("context") && j.at("context").is_array()) r.context = j.at("context").get<std::vector<std::string>>();
    if (j.contains("final_binary")) {
      r.origin = j.value("origin", "MLSNT");
      r.labels = j.at("final_categories").get<std::vector<std::string>>();
      if (r.labels.empty()) r.labels.emplace_back("Non-Toxic");
    } else {
      r.origin = j.at("origin").get<std::string>();
      if (j.contains("labels")) r.labels = j.at("labels").get<std::vector<std::string>>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("malformed corpus row: ") + e.what());
  }
}

}  // namespace toxlabel
