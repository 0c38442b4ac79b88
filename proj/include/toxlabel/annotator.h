#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "toxlabel/ingest.h"
#include "toxlabel/prompting.h"

namespace toxlabel {

enum class ResponseStatus { kOk, kApiFailure };

std::string_view to_string(ResponseStatus s);

struct RawResponse {
  std::string record_id;
  std::string source;
  std::string body_text;  // assistant content; non-empty when ok
  ResponseStatus status = ResponseStatus::kOk;
  int attempts = 0;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  std::string error;  // last failure message, if any

  friend bool operator==(const RawResponse&, const RawResponse&) = default;
};

// Outcome of a single call to the completion endpoint.
struct AttemptResult {
  bool ok = false;
  std::string content;
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_tokens;
  std::string error;
  bool retryable = true;
};

// A chat-completions backend. Implementations must be safe to call from
// several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // `attempt` is 1-based.
  virtual AttemptResult complete(const AnnotationRequest& request, int attempt) = 0;
};

using TokenEstimator = std::function<std::int64_t(std::string_view)>;

// ceil(code points / 4).
std::int64_t estimate_tokens_chars_div_4(std::string_view text);

struct BatchOptions {
  std::size_t parallelism = 8;  // P: requests in flight at once
  int max_attempts = 3;         // R: attempts per request, including the first
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{30000};
  std::uint64_t seed = 0;  // drives backoff jitter only
  // Defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
  TokenEstimator estimator = estimate_tokens_chars_div_4;
};

// Full-jitter exponential backoff before attempt `attempt + 1`: a uniform draw
// from [0, min(cap, base * 2^(attempt-1))], seeded by (seed, record_id).
std::chrono::milliseconds backoff_delay(const BatchOptions& options, std::string_view record_id, int attempt);

// One response per request, sorted by record_id. Failures are recorded on the
// response and never abort the batch.
std::vector<RawResponse> annotate_batch(std::span<const AnnotationRequest> requests, ChatBackend& backend,
                                        const BatchOptions& options = {});

// Deterministic stand-in for the remote endpoint. Replies come from a fixture
// keyed by record_id, or echo the user message when no fixture is loaded.
class MockBackend : public ChatBackend {
 public:
  struct Entry {
    std::optional<std::string> body;
    int fail_attempts = 0;  // first N attempts fail with a retryable error
  };

  MockBackend() = default;  // echo mode
  // Moves the script only; call counters start from zero.
  MockBackend(MockBackend&& other) noexcept
      : echo_(other.echo_), entries_(std::move(other.entries_)), call_delay_(other.call_delay_) {}
  static MockBackend from_fixture(std::istream& in);
  static MockBackend from_fixture_file(const std::string& path);

  void set(std::string record_id, Entry entry);
  // Sleep inside each call so concurrent calls overlap.
  void set_call_delay(std::chrono::microseconds d) { call_delay_ = d; }

  AttemptResult complete(const AnnotationRequest& request, int attempt) override;

  std::size_t max_in_flight() const { return max_in_flight_.load(); }
  std::size_t total_calls() const { return total_calls_.load(); }

 private:
  bool echo_ = true;
  std::map<std::string, Entry, std::less<>> entries_;
  std::chrono::microseconds call_delay_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> max_in_flight_{0};
  std::atomic<std::size_t> total_calls_{0};
};

struct HttpBackendConfig {
  std::string url = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::seconds timeout{60};
};

// POSTs {model, messages[{role, content}], temperature} and reads
// choices[0].message.content. Transport errors, 408, 409, 429 and 5xx are
// retryable; other statuses are not.
class HttpBackend : public ChatBackend {
 public:
  // Throws Error(kMissingCredential) when the credential variable is unset,
  // Error(kInvalidConfig) for a malformed URL.
  explicit HttpBackend(HttpBackendConfig config);
  AttemptResult complete(const AnnotationRequest& request, int attempt) override;

  static nlohmann::json request_body(const AnnotationRequest& request);
  static AttemptResult parse_response_body(int status, const std::string& body);

 private:
  HttpBackendConfig config_;
  std::string api_key_;
  std::string scheme_host_port_;
  std::string path_;
};

// Pricing in currency units per one million tokens. The defaults are the
// gpt-4o-mini batch-tier list prices.
struct PricingConfig {
  double input_price_per_million = 0.075;
  double output_price_per_million = 0.30;
  // Expected completion size used before real responses exist.
  std::int64_t expected_output_tokens = 40;
};

struct CostLine {
  std::int64_t records = 0;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double cost = 0.0;
};

struct CostEstimate {
  CostLine total;
  std::map<std::string, CostLine> per_source;
};

double price_tokens(std::int64_t input_tokens, std::int64_t output_tokens, const PricingConfig& pricing);

CostEstimate estimate_cost(std::span<const ChatRecord> records, const RequestConfig& request_config,
                           const PricingConfig& pricing, const TokenEstimator& estimator = estimate_tokens_chars_div_4);

// Cost of responses already collected, using their recorded token counts.
CostEstimate actual_cost(std::span<const RawResponse> responses, const PricingConfig& pricing);

nlohmann::ordered_json to_json(const RawResponse& r);
RawResponse raw_response_from_json(const nlohmann::json& j);
void write_responses_jsonl(std::ostream& out, std::span<const RawResponse> responses);
std::vector<RawResponse> read_responses_jsonl(std::istream& in);

}  // namespace toxlabel
