#include "toxlabel/metrics.h"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "toxlabel/error.h"
#include "toxlabel/text.h"

namespace toxlabel {

double F1Report::score(Averaging averaging) const {
  switch (averaging) {
    case Averaging::kMacro: return macro;
    case Averaging::kWeighted: return weighted;
    case Averaging::kPerClass: break;
  }
  throw std::invalid_argument("per-class averaging has no scalar score");
}

F1Report f1_scores(std::span<const int> gold, std::span<const int> pred, std::size_t num_classes,
                   ZeroSupport zero_support) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "gold has " + std::to_string(gold.size()) + " labels, pred has " + std::to_string(pred.size()));
  }
  if (gold.empty()) throw Error(ErrorCode::kEmptyInput, "no label pairs");

  F1Report r;
  r.total = static_cast<std::int64_t>(gold.size());
  r.per_class.resize(num_classes);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const int g = gold[i];
    const int p = pred[i];
    if (g < 0 || p < 0 || static_cast<std::size_t>(g) >= num_classes || static_cast<std::size_t>(p) >= num_classes) {
      throw Error(ErrorCode::kLabelMismatch, "label index outside the declared class set");
    }
    ++r.per_class[static_cast<std::size_t>(g)].support;
    ++r.per_class[static_cast<std::size_t>(p)].predicted;
    if (g == p) ++r.per_class[static_cast<std::size_t>(g)].true_positive;
  }

  double macro_sum = 0.0;
  std::size_t macro_n = 0;
  double weighted_sum = 0.0;
  for (auto& c : r.per_class) {
    c.precision = c.predicted > 0 ? static_cast<double>(c.true_positive) / static_cast<double>(c.predicted) : 0.0;
    c.recall = c.support > 0 ? static_cast<double>(c.true_positive) / static_cast<double>(c.support) : 0.0;
    c.f1 = (c.precision + c.recall) > 0.0 ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
    if (c.support > 0 || zero_support == ZeroSupport::kIncludeAsZero) {
      macro_sum += c.f1;
      ++macro_n;
    }
    weighted_sum += c.f1 * static_cast<double>(c.support);
  }
  r.macro = macro_n > 0 ? macro_sum / static_cast<double>(macro_n) : 0.0;
  r.weighted = weighted_sum / static_cast<double>(r.total);
  return r;
}

F1Report f1_scores(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                   std::vector<std::string> classes, ZeroSupport zero_support) {
  if (classes.empty()) {
    std::set<std::string> seen(gold.begin(), gold.end());
    seen.insert(pred.begin(), pred.end());
    classes.assign(seen.begin(), seen.end());
  }
  std::map<std::string, int, std::less<>> index;
  for (const auto& c : classes) {
    if (!index.emplace(c, static_cast<int>(index.size())).second) {
      throw Error(ErrorCode::kLabelMismatch, "duplicate class '" + c + "'");
    }
  }
  auto encode = [&](const std::vector<std::string>& labels) {
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
      auto it = index.find(l);
      if (it == index.end()) throw Error(ErrorCode::kLabelMismatch, "label '" + l + "' not in class set");
      out.push_back(it->second);
    }
    return out;
  };
  const auto g = encode(gold);
  const auto p = encode(pred);
  F1Report r = f1_scores(g, p, classes.size(), zero_support);
  for (std::size_t i = 0; i < classes.size(); ++i) r.per_class[i].label = classes[i];
  return r;
}

F1Report token_f1(const std::vector<std::vector<std::string>>& gold, const std::vector<std::vector<std::string>>& pred,
                  std::vector<std::string> classes, ZeroSupport zero_support) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gold has " + std::to_string(gold.size()) + " sequences, pred has " +
                                               std::to_string(pred.size()));
  }
  std::vector<std::string> flat_gold, flat_pred;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw Error(ErrorCode::kShapeMismatch, "sequence " + std::to_string(i));
    }
    flat_gold.insert(flat_gold.end(), gold[i].begin(), gold[i].end());
    flat_pred.insert(flat_pred.end(), pred[i].begin(), pred[i].end());
  }
  return f1_scores(flat_gold, flat_pred, std::move(classes), zero_support);
}

Category line_label(BinaryLabel binary, const std::set<Category>& categories) {
  if (binary == BinaryLabel::kNonToxic) return Category::kNonToxic;
  if (categories.empty()) throw Error(ErrorCode::kLabelMismatch, "toxic line without a category");
  return primary_category(categories);
}

namespace {

SubsetScore score_subset(const std::vector<int>& gold, const std::vector<int>& pred) {
  SubsetScore s;
  s.size = static_cast<std::int64_t>(gold.size());
  if (!gold.empty()) s.weighted_f1 = f1_scores(gold, pred, kLabelCount).weighted;
  return s;
}

}  // namespace

FilterReport filtered_evaluation(std::span<const GoldRecord> records,
                                 const std::map<std::string, LlmAnnotation, std::less<>>& annotations,
                                 ToxicConditioning conditioning) {
  FilterReport report;
  report.conditioning = conditioning;
  std::vector<int> all_g, all_p, tox_g, tox_p, agt_g, agt_p, agl_g, agl_p, bin_g, bin_p;
  for (const auto& rec : records) {
    auto it = annotations.find(rec.id);
    if (it == annotations.end()) {
      ++report.excluded;
      continue;
    }
    const LlmAnnotation& a = it->second;
    const int g = static_cast<int>(index_of(line_label(rec.binary, rec.categories)));
    const int p = static_cast<int>(index_of(line_label(a.overall, a.categories())));
    const bool gold_toxic = rec.binary == BinaryLabel::kToxic;
    const bool pred_toxic = a.overall == BinaryLabel::kToxic;

    all_g.push_back(g);
    all_p.push_back(p);
    bin_g.push_back(gold_toxic ? 1 : 0);
    bin_p.push_back(pred_toxic ? 1 : 0);
    const bool in_toxic = conditioning == ToxicConditioning::kPredicted ? pred_toxic : gold_toxic;
    if (in_toxic) {
      tox_g.push_back(g);
      tox_p.push_back(p);
    }
    if (gold_toxic && pred_toxic) {
      agt_g.push_back(g);
      agt_p.push_back(p);
    }
    if (gold_toxic == pred_toxic) {
      agl_g.push_back(g);
      agl_p.push_back(p);
    }
  }
  report.no_filter = score_subset(all_g, all_p);
  report.llm_toxic = score_subset(tox_g, tox_p);
  report.agreed_toxic = score_subset(agt_g, agt_p);
  report.agreed_labels = score_subset(agl_g, agl_p);
  if (!bin_g.empty()) report.binary_weighted_f1 = f1_scores(bin_g, bin_p, 2).weighted;
  return report;
}

namespace {

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json to_json(const SubsetScore& s) {
  nlohmann::ordered_json j;
  j["size"] = s.size;
  j["weighted_f1"] = optional_json(s.weighted_f1);
  return j;
}

std::string pct(const std::optional<double>& v) { return v ? format_fixed(*v * 100.0, 2) + "%" : "-"; }

std::string pad(const std::string& s, std::size_t width, bool left = false) {
  const std::size_t len = codepoint_count(s);
  if (len >= width) return s;
  return left ? s + std::string(width - len, ' ') : std::string(width - len, ' ') + s;
}

}  // namespace

nlohmann::ordered_json to_json(const F1Report& r) {
  nlohmann::ordered_json j;
  j["total"] = r.total;
  j["macro_f1"] = r.macro;
  j["weighted_f1"] = r.weighted;
  auto classes = nlohmann::ordered_json::array();
  for (const auto& c : r.per_class) {
    nlohmann::ordered_json cj;
    cj["label"] = c.label;
    cj["support"] = c.support;
    cj["predicted"] = c.predicted;
    cj["true_positive"] = c.true_positive;
    cj["precision"] = c.precision;
    cj["recall"] = c.recall;
    cj["f1"] = c.f1;
    classes.push_back(std::move(cj));
  }
  j["per_class"] = std::move(classes);
  return j;
}

nlohmann::ordered_json to_json(const FilterReport& r) {
  nlohmann::ordered_json j;
  j["conditioning"] = r.conditioning == ToxicConditioning::kPredicted ? "predicted" : "gold";
  j["excluded"] = r.excluded;
  j["binary_weighted_f1"] = optional_json(r.binary_weighted_f1);
  j["no_filter"] = to_json(r.no_filter);
  j["llm_toxic"] = to_json(r.llm_toxic);
  j["agreed_toxic"] = to_json(r.agreed_toxic);
  j["agreed_labels"] = to_json(r.agreed_labels);
  return j;
}

std::string format_filter_table(const FilterReport& r) {
  const std::vector<std::pair<std::string, const SubsetScore*>> cols = {
      {"No Filter", &r.no_filter},
      {"LLM \"Toxic\"", &r.llm_toxic},
      {"Agreed Toxic", &r.agreed_toxic},
      {"Agreed Labels", &r.agreed_labels},
  };
  constexpr std::size_t kLabelWidth = 12;
  std::ostringstream out;
  out << pad("", kLabelWidth, true);
  for (const auto& [name, _] : cols) out << " | " << pad(name, 13);
  out << '\n' << std::string(kLabelWidth, '-');
  for (std::size_t i = 0; i < cols.size(); ++i) out << "-+-" << std::string(13, '-');
  out << '\n' << pad("Weighted F1", kLabelWidth, true);
  for (const auto& [_, s] : cols) out << " | " << pad(pct(s->weighted_f1), 13);
  out << '\n' << pad("Lines", kLabelWidth, true);
  for (const auto& [_, s] : cols) out << " | " << pad(std::to_string(s->size), 13);
  out << '\n';
  return out.str();
}

std::string format_f1_table(const F1Report& r) {
  std::size_t width = 5;
  for (const auto& c : r.per_class) width = std::max(width, codepoint_count(c.label));
  std::ostringstream out;
  out << pad("Class", width, true) << " | " << pad("Precision", 9) << " | " << pad("Recall", 9) << " | "
      << pad("F1", 9) << " | " << pad("Support", 7) << '\n';
  for (const auto& c : r.per_class) {
    out << pad(c.label, width, true) << " | " << pad(pct(c.precision), 9) << " | " << pad(pct(c.recall), 9) << " | "
        << pad(pct(c.f1), 9) << " | " << pad(std::to_string(c.support), 7) << '\n';
  }
  out << pad("Macro", width, true) << " | " << pad("", 9) << " | " << pad("", 9) << " | " << pad(pct(r.macro), 9)
      << " | " << pad(std::to_string(r.total), 7) << '\n';
  out << pad("Weighted", width, true) << " | " << pad("", 9) << " | " << pad("", 9) << " | "
      << pad(pct(r.weighted), 9) << " | " << pad(std::to_string(r.total), 7) << '\n';
  return out.str();
}

double mean_score(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "no scores to average");
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

}  // namespace toxlabel
