#include "toxlabel/sampler.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <numeric>

#include "toxlabel/csv.h"
#include "toxlabel/error.h"
#include "toxlabel/hashing.h"
#include "toxlabel/text.h"

namespace toxlabel {

std::int64_t QuotaPlan::total() const { return std::accumulate(targets.begin(), targets.end(), std::int64_t{0}); }

QuotaPlan plan_quotas(const LabelCounts& available, std::int64_t base_target, SpilloverFractions fractions) {
  if (base_target < 0) throw Error(ErrorCode::kInvalidConfig, "base_target must be non-negative");
  if (fractions.to_next_toxic < 0 || fractions.to_non_toxic < 0 ||
      std::abs(fractions.to_next_toxic + fractions.to_non_toxic - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidConfig, "spillover fractions must be non-negative and sum to 1");
  }
  for (auto a : available) {
    if (a < 0) throw Error(ErrorCode::kInvalidConfig, "available counts must be non-negative");
  }

  QuotaPlan plan;
  plan.available = available;
  plan.base_target = base_target;
  plan.fractions = fractions;
  plan.targets.fill(base_target);

  const std::size_t non_toxic = index_of(Category::kNonToxic);
  for (std::size_t i = 0; i < kToxicCategoryCount; ++i) {
    const std::int64_t shortfall = std::max<std::int64_t>(0, plan.targets[i] - available[i]);
    if (shortfall == 0) continue;
    plan.targets[i] = available[i];
    const bool last = i + 1 == kToxicCategoryCount;
    const auto to_next =
        last ? 0 : static_cast<std::int64_t>(round_half_up(fractions.to_next_toxic * static_cast<double>(shortfall), 0));
    if (!last) plan.targets[i + 1] += to_next;
    plan.targets[non_toxic] += shortfall - to_next;
  }
  plan.targets[non_toxic] = std::min(plan.targets[non_toxic], available[non_toxic]);
  return plan;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: empty range");
  // largest multiple of bound representable, to reject the biased tail
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

LabelCounts count_available(std::span<const PoolItem> pool) {
  LabelCounts counts{};
  for (const auto& p : pool) ++counts[index_of(p.predicted)];
  return counts;
}

EvaluationSet draw_samples(std::span<const PoolItem> pool, const QuotaPlan& plan, std::uint64_t seed) {
  std::array<std::vector<const PoolItem*>, kLabelCount> strata;
  for (const auto& p : pool) strata[index_of(p.predicted)].push_back(&p);
  for (auto& s : strata) {
    std::sort(s.begin(), s.end(), [](const PoolItem* a, const PoolItem* b) { return a->id < b->id; });
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i]->id == s[i - 1]->id) throw Error(ErrorCode::kDuplicateRecordId, s[i]->id);
    }
  }

  std::mt19937_64 rng(seed);
  EvaluationSet out;
  for (std::size_t label = 0; label < kLabelCount; ++label) {
    auto& stratum = strata[label];
    const auto target = static_cast<std::size_t>(std::max<std::int64_t>(0, plan.targets[label]));
    const std::size_t take = std::min(target, stratum.size());
    // partial Fisher-Yates: the first `take` slots become the sample
    for (std::size_t i = 0; i < take; ++i) {
      const auto j = i + static_cast<std::size_t>(uniform_below(rng, stratum.size() - i));
      std::swap(stratum[i], stratum[j]);
      out.items.push_back(*stratum[i]);
    }
    out.drawn[label] = static_cast<std::int64_t>(take);
    out.shortfall[label] = static_cast<std::int64_t>(target - take);
  }
  for (std::size_t i = out.items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(out.items[i - 1], out.items[j]);
  }
  return out;
}

std::vector<GroupEvaluation> build_evaluation_sets(std::span<const PoolItem> pool, std::int64_t base_target,
                                                   SpilloverFractions fractions, std::uint64_t seed) {
  std::map<std::pair<std::string, std::string>, std::vector<PoolItem>> groups;
  for (const auto& p : pool) groups[{p.game, p.language}].push_back(p);
  std::vector<GroupEvaluation> out;
  for (auto& [key, items] : groups) {
    GroupEvaluation g;
    g.game = key.first;
    g.language = key.second;
    g.plan = plan_quotas(count_available(items), base_target, fractions);
    g.set = draw_samples(items, g.plan, fnv1a64(key.first + '\x1f' + key.second, seed));
    out.push_back(std::move(g));
  }
  return out;
}

nlohmann::ordered_json to_json(const QuotaPlan& plan) {
  nlohmann::ordered_json j;
  j["base_target"] = plan.base_target;
  j["to_next_toxic"] = plan.fractions.to_next_toxic;
  j["to_non_toxic"] = plan.fractions.to_non_toxic;
  nlohmann::ordered_json targets, available;
  for (Category c : kAllLabels) {
    targets[std::string(display_name(c))] = plan.targets[index_of(c)];
    available[std::string(display_name(c))] = plan.available[index_of(c)];
  }
  j["targets"] = std::move(targets);
  j["available"] = std::move(available);
  j["total"] = plan.total();
  return j;
}

nlohmann::ordered_json to_json(const PoolItem& item) {
  nlohmann::ordered_json j;
  j["id"] = item.id;
  j["game"] = item.game;
  j["language"] = item.language;
  j["text"] = item.text;
  j["context"] = item.context;
  j["predicted_label"] = display_name(item.predicted);
  return j;
}

PoolItem pool_item_from_json(const nlohmann::json& j) {
  try {
    PoolItem p;
    p.id = j.at("id").get<std::string>();
    p.game = j.value("game", "");
    p.language = j.value("language", "");
    p.text = j.at("text").get<std::string>();
    if (j.contains("context") && j.at("context").is_array()) p.context = j.at("context").get<std::vector<std::string>>();
    p.predicted = parse_category(j.at("predicted_label").get<std::string>());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("malformed pool row: ") + e.what());
  }
}

void write_annotation_sheet(std::ostream& out, std::span<const PoolItem> items) {
  out << csv::format_row({"id", "game", "language", "text", "context", "predicted_label", "gold_label"});
  for (const auto& it : items) {
    std::string context;
    for (std::size_t i = 0; i < it.context.size(); ++i) {
      if (i > 0) context += '\n';
      context += it.context[i];
    }
    out << csv::format_row({it.id, it.game, it.language, it.text, context, std::string(display_name(it.predicted)), ""});
  }
}

}  // namespace toxlabel
