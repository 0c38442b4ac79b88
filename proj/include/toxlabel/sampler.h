#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "toxlabel/taxonomy.h"

namespace toxlabel {

// Per-label counts indexed by index_of(Category), Non-Toxic last.
using LabelCounts = std::array<std::int64_t, kLabelCount>;

struct SpilloverFractions {
  double to_next_toxic = 0.2;
  double to_non_toxic = 0.8;
};

struct QuotaPlan {
  LabelCounts targets{};
  LabelCounts available{};
  std::int64_t base_target = 50;
  SpilloverFractions fractions;

  std::int64_t total() const;
};

// Walks the toxic categories in severity order. A category short of its
// target by S keeps what is available, passes round_half_up(to_next_toxic * S)
// to the next toxic category and the rest to Non-Toxic; the last toxic
// category passes all of S to Non-Toxic. Non-Toxic is finally capped at its
// availability.
QuotaPlan plan_quotas(const LabelCounts& available, std::int64_t base_target = 50,
                      SpilloverFractions fractions = {});

struct PoolItem {
  std::string id;
  std::string game;
  std::string language;
  std::string text;
  std::vector<std::string> context;
  Category predicted = Category::kNonToxic;
};

struct EvaluationSet {
  std::vector<PoolItem> items;  // deterministic shuffle of all draws
  LabelCounts drawn{};
  LabelCounts shortfall{};  // target - drawn, per label
};

// Uniform sampling without replacement inside each predicted-label stratum.
// Throws Error(kDuplicateRecordId) if the pool repeats an id.
EvaluationSet draw_samples(std::span<const PoolItem> pool, const QuotaPlan& plan, std::uint64_t seed);

struct GroupEvaluation {
  std::string game;
  std::string language;
  QuotaPlan plan;
  EvaluationSet set;
};

// One plan and draw per (game, language), groups in sorted order. Each group's
// generator is seeded from `seed` and the group key.
std::vector<GroupEvaluation> build_evaluation_sets(std::span<const PoolItem> pool, std::int64_t base_target,
                                                   SpilloverFractions fractions, std::uint64_t seed);

LabelCounts count_available(std::span<const PoolItem> pool);

// Uniform integer in [0, bound) from a 64-bit engine by rejection; identical
// across standard libraries, unlike std::uniform_int_distribution.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

nlohmann::ordered_json to_json(const QuotaPlan& plan);
nlohmann::ordered_json to_json(const PoolItem& item);
PoolItem pool_item_from_json(const nlohmann::json& j);

// Annotation sheet: id, game, language, text, context, predicted_label, gold_label (empty).
void write_annotation_sheet(std::ostream& out, std::span<const PoolItem> items);

}  // namespace toxlabel
