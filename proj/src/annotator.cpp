#include "toxlabel/annotator.h"

#include <algorithm>
#include <fstream>
#include <random>
#include <thread>

#include "toxlabel/error.h"
#include "toxlabel/hashing.h"

namespace toxlabel {

std::string_view to_string(ResponseStatus s) { return s == ResponseStatus::kOk ? "ok" : "api_failure"; }

std::int64_t estimate_tokens_chars_div_4(std::string_view text) {
  const auto n = static_cast<std::int64_t>(codepoint_count(text));
  return (n + 3) / 4;
}

std::chrono::milliseconds backoff_delay(const BatchOptions& options, std::string_view record_id, int attempt) {
  const auto base = options.backoff_base.count();
  const auto cap = options.backoff_cap.count();
  if (base <= 0 || cap <= 0) return std::chrono::milliseconds{0};
  const int shift = std::clamp(attempt - 1, 0, 30);
  const std::int64_t ceiling = std::min<std::int64_t>(cap, base << shift);
  std::mt19937_64 rng(fnv1a64(record_id, options.seed ^ 0x9e3779b97f4a7c15ULL) + static_cast<std::uint64_t>(attempt));
  // top 53 bits -> [0, 1)
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::chrono::milliseconds{static_cast<std::int64_t>(u * static_cast<double>(ceiling + 1))};
}

namespace {

RawResponse run_one(const AnnotationRequest& req, ChatBackend& backend, const BatchOptions& options) {
  RawResponse out;
  out.record_id = req.record_id;
  out.source = req.source;
  const int max_attempts = std::max(1, options.max_attempts);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    out.attempts = attempt;
    AttemptResult r;
    try {
      r = backend.complete(req, attempt);
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
      r.retryable = true;
    }
    if (r.ok && !r.content.empty()) {
      out.status = ResponseStatus::kOk;
      out.body_text = std::move(r.content);
      out.error.clear();
      std::int64_t in_tokens = 0;
      for (const auto& m : req.messages) in_tokens += options.estimator(m.content);
      out.input_tokens = r.input_tokens.value_or(in_tokens);
      out.output_tokens = r.output_tokens.value_or(options.estimator(out.body_text));
      return out;
    }
    out.error = r.ok ? "empty completion" : r.error;
    if (!r.retryable) break;
    if (attempt < max_attempts) {
      const auto delay = backoff_delay(options, req.record_id, attempt);
      if (options.sleep) {
        options.sleep(delay);
      } else if (delay.count() > 0) {
        std::this_thread::sleep_for(delay);
      }
    }
  }
  out.status = ResponseStatus::kApiFailure;
  out.body_text.clear();
  return out;
}

}  // namespace

std::vector<RawResponse> annotate_batch(std::span<const AnnotationRequest> requests, ChatBackend& backend,
                                        const BatchOptions& options) {
  std::vector<RawResponse> results(requests.size());
  if (requests.empty()) return results;

  const std::size_t workers = std::clamp<std::size_t>(options.parallelism, 1, requests.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) {
      results[i] = run_one(requests[i], backend, options);
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const RawResponse& a, const RawResponse& b) { return a.record_id < b.record_id; });
  return results;
}

MockBackend MockBackend::from_fixture(std::istream& in) {
  MockBackend m;
  m.echo_ = false;
  std::string line;
  std::int64_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Entry e;
      if (j.contains("body_text") && !j.at("body_text").is_null()) e.body = j.at("body_text").get<std::string>();
      e.fail_attempts = j.value("fail_attempts", 0);
      m.entries_.insert_or_assign(j.at("record_id").get<std::string>(), std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError, "mock fixture row " + std::to_string(n) + ": " + e.what());
    }
  }
  return m;
}

MockBackend MockBackend::from_fixture_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open mock fixture " + path);
  return from_fixture(in);
}

void MockBackend::set(std::string record_id, Entry entry) {
  echo_ = false;
  entries_.insert_or_assign(std::move(record_id), std::move(entry));
}

AttemptResult MockBackend::complete(const AnnotationRequest& request, int attempt) {
  const auto now = in_flight_.fetch_add(1) + 1;
  auto prev = max_in_flight_.load();
  while (prev < now && !max_in_flight_.compare_exchange_weak(prev, now)) {
  }
  ++total_calls_;
  if (call_delay_.count() > 0) std::this_thread::sleep_for(call_delay_);

  AttemptResult r;
  if (echo_) {
    r.ok = true;
    r.content = request.messages.empty() ? std::string{} : request.messages.back().content;
  } else if (auto it = entries_.find(request.record_id); it == entries_.end()) {
    r.error = "mock: no fixture entry for " + request.record_id;
    r.retryable = false;
  } else if (attempt <= it->second.fail_attempts || !it->second.body) {
    r.error = "mock: scripted failure (attempt " + std::to_string(attempt) + ")";
    r.retryable = true;
  } else {
    r.ok = true;
    r.content = *it->second.body;
  }
  in_flight_.fetch_sub(1);
  return r;
}

double price_tokens(std::int64_t input_tokens, std::int64_t output_tokens, const PricingConfig& pricing) {
  return (static_cast<double>(input_tokens) * pricing.input_price_per_million +
          static_cast<double>(output_tokens) * pricing.output_price_per_million) /
         1e6;
}

namespace {

void finalize(CostEstimate& est, const PricingConfig& pricing) {
  for (auto& [_, line] : est.per_source) line.cost = price_tokens(line.input_tokens, line.output_tokens, pricing);
  est.total.cost = price_tokens(est.total.input_tokens, est.total.output_tokens, pricing);
}

}  // namespace

CostEstimate estimate_cost(std::span<const ChatRecord> records, const RequestConfig& request_config,
                           const PricingConfig& pricing, const TokenEstimator& estimator) {
  if (pricing.input_price_per_million < 0 || pricing.output_price_per_million < 0) {
    throw Error(ErrorCode::kInvalidConfig, "prices must be non-negative");
  }
  CostEstimate est;
  const std::int64_t system_tokens = estimator(render_system_prompt(request_config.prompt_version));
  for (const auto& r : records) {
    const std::int64_t in = system_tokens + estimator(render_user_message(r.context, r.text));
    for (CostLine* line : {&est.total, &est.per_source[r.source]}) {
      ++line->records;
      line->input_tokens += in;
      line->output_tokens += pricing.expected_output_tokens;
    }
  }
  finalize(est, pricing);
  return est;
}

CostEstimate actual_cost(std::span<const RawResponse> responses, const PricingConfig& pricing) {
  CostEstimate est;
  for (const auto& r : responses) {
    for (CostLine* line : {&est.total, &est.per_source[r.source]}) {
      ++line->records;
      line->input_tokens += r.input_tokens;
      line->output_tokens += r.output_tokens;
    }
  }
  finalize(est, pricing);
  return est;
}

nlohmann::ordered_json to_json(const RawResponse& r) {
  nlohmann::ordered_json j;
  j["record_id"] = r.record_id;
  j["source"] = r.source;
  j["status"] = to_string(r.status);
  j["attempts"] = r.attempts;
  j["body_text"] = r.body_text;
  j["input_tokens"] = r.input_tokens;
  j["output_tokens"] = r.output_tokens;
  j["error"] = r.error;
  return j;
}

RawResponse raw_response_from_json(const nlohmann::json& j) {
  try {
    RawResponse r;
    r.record_id = j.at("record_id").get<std::string>();
    r.source = j.value("source", "");
    const auto status = j.at("status").get<std::string>();
    if (status == "ok") {
      r.status = ResponseStatus::kOk;
    } else if (status == "api_failure") {
      r.status = ResponseStatus::kApiFailure;
    } else {
      throw Error(ErrorCode::kFormatError, "unknown response status '" + status + "'");
    }
    r.attempts = j.at("attempts").get<int>();
    r.body_text = j.value("body_text", "");
    r.input_tokens = j.value("input_tokens", std::int64_t{0});
    r.output_tokens = j.value("output_tokens", std::int64_t{0});
    r.error = j.value("error", "");
    if (r.status == ResponseStatus::kOk && r.body_text.empty()) {
      throw Error(ErrorCode::kFormatError, r.record_id + ": ok response with empty body");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("malformed response row: ") + e.what());
  }
}

void write_responses_jsonl(std::ostream& out, std::span<const RawResponse> responses) {
  for (const auto& r : responses) {
    out << to_json(r).dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
  }
}

std::vector<RawResponse> read_responses_jsonl(std::istream& in) {
  std::vector<RawResponse> out;
  std::string line;
  std::int64_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(raw_response_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kFormatError, "responses row " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace toxlabel
