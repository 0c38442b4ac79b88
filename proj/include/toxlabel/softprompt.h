#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace toxlabel {

enum class GameToken { kGame1, kGame2, kMlsnt, kGameUnknown };

std::string_view to_string(GameToken t);  // "GAME_1", "GAME_2", "MLSNT", "GAME_UNKNOWN"
std::optional<GameToken> game_token_from_string(std::string_view s);

enum class Placement { kBeforeContext, kBeforeCurrentLine };

std::string_view to_string(Placement p);
Placement placement_from_string(std::string_view s);

enum class SegmentKind { kGameToken, kContextLine, kSeparator, kCurrentLine };

std::string_view to_string(SegmentKind k);

struct Segment {
  SegmentKind kind;
  std::string text;

  friend bool operator==(const Segment&, const Segment&) = default;
};

using LengthFn = std::function<std::int64_t(std::string_view)>;

// ceil(code points / 4)
std::int64_t default_length_units(std::string_view text);

inline constexpr std::string_view kSeparatorText = "[SEP]";
inline constexpr std::int64_t kDefaultMaxLength = 512;

struct AssembledSequence {
  std::string id;
  GameToken token = GameToken::kGameUnknown;
  Placement placement = Placement::kBeforeContext;
  std::vector<Segment> segments;
  std::int64_t length_units = 0;
  std::size_t context_dropped = 0;
  std::vector<std::string> labels;

  friend bool operator==(const AssembledSequence&, const AssembledSequence&) = default;
};

struct AssembleOptions {
  Placement placement = Placement::kBeforeContext;
  std::int64_t max_len = kDefaultMaxLength;
  LengthFn length_fn = default_length_units;
  // Units charged for the game token and for the separator.
  std::int64_t special_token_units = 1;
};

// Orders segments as [token, context..., SEP, line] or [context..., SEP, token, line].
// Context is dropped oldest-first until the sequence fits max_len. Throws
// Error(kCurrentLineTooLong) when the line plus the two special tokens cannot fit.
AssembledSequence assemble(std::string_view id, const std::vector<std::string>& context, std::string_view current_line,
                           GameToken token, const AssembleOptions& options = {});

struct CorpusRecord {
  std::string id;
  std::string origin;  // dataset or game the record came from
  std::vector<std::string> context;
  std::string text;
  std::vector<std::string> labels;
};

// Assembles each record with the token mapped from its origin, or with
// `override_token` for every record when given (inference on an unknown game).
// Throws Error(kUnmappedOrigin) for an origin missing from the map.
std::vector<AssembledSequence> build_corpus(std::span<const CorpusRecord> records,
                                            const std::map<std::string, GameToken, std::less<>>& token_map,
                                            const AssembleOptions& options = {},
                                            std::optional<GameToken> override_token = std::nullopt);

// {id, token, segments: [{kind, text}], labels}
nlohmann::ordered_json to_json(const AssembledSequence& s);

// Accepts generic rows {id, origin, text, context, labels} and MLSNT rows
// (origin "MLSNT", labels from final_categories or ["Non-Toxic"]).
CorpusRecord corpus_record_from_json(const nlohmann::json& j);

}  // namespace toxlabel
