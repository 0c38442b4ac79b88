#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "toxlabel/annotator.h"
#include "toxlabel/error.h"

using namespace toxlabel;

namespace {

std::vector<AnnotationRequest> requests(int n, std::string source = "S") {
  std::vector<AnnotationRequest> out;
  for (int i = n - 1; i >= 0; --i) {  // deliberately unsorted
    ChatRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "%s:%08d:x", source.c_str(), i);
    r.id = id;
    r.source = source;
    r.text = "line " + std::to_string(i);
    out.push_back(build_request(r));
  }
  return out;
}

BatchOptions quiet(std::size_t p = 4) {
  BatchOptions o;
  o.parallelism = p;
  o.sleep = [](std::chrono::milliseconds) {};
  return o;
}

}  // namespace

TEST_CASE("echo mock returns every request, ordered by id") {
  MockBackend mock;
  auto out = annotate_batch(requests(3), mock, quiet());
  REQUIRE(out.size() == 3);
  CHECK(out[0].record_id < out[1].record_id);
  CHECK(out[1].record_id < out[2].record_id);
  for (const auto& r : out) {
    CHECK(r.status == ResponseStatus::kOk);
    CHECK(r.attempts == 1);
    CHECK_FALSE(r.body_text.empty());
    CHECK(r.body_text.find("CURRENT_LINE: ") != std::string::npos);
  }
}

TEST_CASE("empty batch") {
  MockBackend mock;
  CHECK(annotate_batch({}, mock, quiet()).empty());
}

TEST_CASE("permanent failure exhausts the retries") {
  auto reqs = requests(3);
  MockBackend mock;
  for (const auto& r : reqs) mock.set(r.record_id, {"{\"overall_category\": \"non-toxic\"}", 0});
  mock.set("S:00000002:x", {std::nullopt, 0});
  std::vector<std::chrono::milliseconds> sleeps;
  std::mutex mu;
  auto opts = quiet(1);
  opts.max_attempts = 3;
  opts.sleep = [&](std::chrono::milliseconds d) {
    std::lock_guard lock(mu);
    sleeps.push_back(d);
  };
  auto out = annotate_batch(reqs, mock, opts);
  REQUIRE(out.size() == 3);
  CHECK(out[2].record_id == "S:00000002:x");
  CHECK(out[2].status == ResponseStatus::kApiFailure);
  CHECK(out[2].attempts == 3);
  CHECK(out[2].body_text.empty());
  CHECK_FALSE(out[2].error.empty());
  CHECK(out[0].status == ResponseStatus::kOk);
  CHECK(out[1].status == ResponseStatus::kOk);
  CHECK(sleeps.size() == 2);  // between attempts only
  CHECK(mock.total_calls() == 5);
}

TEST_CASE("transient failures recover and count attempts") {
  auto reqs = requests(4);
  MockBackend mock;
  int k = 0;
  for (const auto& r : reqs) mock.set(r.record_id, {"body", k++ % 3});
  auto opts = quiet();
  opts.max_attempts = 3;
  auto out = annotate_batch(reqs, mock, opts);
  for (const auto& r : out) CHECK(r.status == ResponseStatus::kOk);
  // ids 3,2,1,0 got fail counts 0,1,2,0
  CHECK(out[0].attempts == 1);
  CHECK(out[1].attempts == 3);
  CHECK(out[2].attempts == 2);
  CHECK(out[3].attempts == 1);
}

TEST_CASE("missing fixture entry is not retried") {
  auto reqs = requests(1);
  MockBackend mock;
  mock.set("other", {"x", 0});
  auto out = annotate_batch(reqs, mock, quiet());
  CHECK(out[0].status == ResponseStatus::kApiFailure);
  CHECK(out[0].attempts == 1);
}

TEST_CASE("backend exceptions become failures") {
  struct Throwing : ChatBackend {
    AttemptResult complete(const AnnotationRequest&, int) override { throw std::runtime_error("boom"); }
  } backend;
  auto out = annotate_batch(requests(2), backend, quiet());
  for (const auto& r : out) {
    CHECK(r.status == ResponseStatus::kApiFailure);
    CHECK(r.attempts == 3);
    CHECK(r.error == "boom");
  }
}

TEST_CASE("in-flight requests never exceed the parallelism bound") {
  for (std::size_t p : {1u, 3u, 8u}) {
    MockBackend mock;
    mock.set_call_delay(std::chrono::microseconds(300));
    annotate_batch(requests(40), mock, quiet(p));
    CHECK(mock.max_in_flight() <= p);
    CHECK(mock.max_in_flight() >= 1);
  }
}

TEST_CASE("backoff is full jitter, bounded and deterministic") {
  BatchOptions o;
  o.backoff_base = std::chrono::milliseconds(100);
  o.backoff_cap = std::chrono::milliseconds(1000);
  o.seed = 9;
  for (int attempt = 1; attempt <= 8; ++attempt) {
    const auto ceiling = std::min<std::int64_t>(1000, 100LL << (attempt - 1));
    for (int i = 0; i < 50; ++i) {
      const std::string id = "id" + std::to_string(i);
      const auto d = backoff_delay(o, id, attempt);
      CHECK(d.count() >= 0);
      CHECK(d.count() <= ceiling);
      CHECK(d == backoff_delay(o, id, attempt));
    }
  }
  o.backoff_base = std::chrono::milliseconds(0);
  CHECK(backoff_delay(o, "x", 1).count() == 0);
}

TEST_CASE("token estimate is ceil of code points over four") {
  CHECK(estimate_tokens_chars_div_4("") == 0);
  CHECK(estimate_tokens_chars_div_4("abcd") == 1);
  CHECK(estimate_tokens_chars_div_4("abcde") == 2);
  CHECK(estimate_tokens_chars_div_4("\xE4\xBD\xA0\xE5\xA5\xBD") == 1);
}

TEST_CASE("cost arithmetic") {
  PricingConfig p;
  p.input_price_per_million = 0.15;
  p.output_price_per_million = 0.60;
  CHECK(price_tokens(1'000'000, 0, p) == doctest::Approx(0.15));
  CHECK(price_tokens(0, 1'000'000, p) == doctest::Approx(0.60));
  CHECK(estimate_cost({}, {}, p).total.cost == 0.0);
}

TEST_CASE("cost estimate by hand and linearity") {
  std::vector<ChatRecord> records(2);
  records[0].source = "A";
  records[0].text = "abcdefgh";  // user message "CONTEXT: NONE\nCURRENT_LINE: abcdefgh" = 36 chars
  records[1].source = "B";
  records[1].text = "x";
  records[1].context = {"ctx"};
  PricingConfig p;
  const std::int64_t sys = estimate_tokens_chars_div_4(render_system_prompt(PromptVersion::kV1));
  auto est = estimate_cost(records, {}, p);
  const std::int64_t a_in = sys + (36 + 3) / 4;
  const std::int64_t b_in = sys + (std::string("CONTEXT:\nctx\nCURRENT_LINE: x").size() + 3) / 4;
  CHECK(est.per_source["A"].input_tokens == a_in);
  CHECK(est.per_source["B"].input_tokens == b_in);
  CHECK(est.total.input_tokens == a_in + b_in);
  CHECK(est.total.output_tokens == 2 * p.expected_output_tokens);
  CHECK(est.total.cost == doctest::Approx(((a_in + b_in) * 0.075 + 80 * 0.30) / 1e6));

  auto doubled = records;
  doubled.insert(doubled.end(), records.begin(), records.end());
  auto est2 = estimate_cost(doubled, {}, p);
  CHECK(est2.total.cost == 2 * est.total.cost);
  CHECK(est2.total.input_tokens == 2 * est.total.input_tokens);
}

TEST_CASE("actual cost uses recorded tokens") {
  std::vector<RawResponse> rs(2);
  rs[0].source = "A";
  rs[0].input_tokens = 1000;
  rs[0].output_tokens = 10;
  rs[1].source = "A";
  rs[1].input_tokens = 500;
  rs[1].output_tokens = 0;
  auto c = actual_cost(rs, {});
  CHECK(c.total.input_tokens == 1500);
  CHECK(c.per_source["A"].records == 2);
}

TEST_CASE("response jsonl round trip and fixture loading") {
  MockBackend seed;
  auto out = annotate_batch(requests(3), seed, quiet());
  std::stringstream buf;
  write_responses_jsonl(buf, out);
  CHECK(read_responses_jsonl(buf) == out);

  std::istringstream fixture(
      "{\"record_id\":\"S:00000000:x\",\"body_text\":\"hello\"}\n"
      "{\"record_id\":\"S:00000001:x\",\"body_text\":\"later\",\"fail_attempts\":1}\n");
  auto mock = MockBackend::from_fixture(fixture);
  auto res = annotate_batch(requests(2), mock, quiet());
  CHECK(res[0].body_text == "hello");
  CHECK(res[1].attempts == 2);

  std::istringstream bad("{\"body_text\":\"x\"}\n");
  CHECK_THROWS_AS(MockBackend::from_fixture(bad), Error);
}

TEST_CASE("http backend wire format") {
  ChatRecord r;
  r.id = "a";
  r.text = "hi";
  auto body = HttpBackend::request_body(build_request(r));
  CHECK(body["model"] == "gpt-4o-mini");
  CHECK(body["temperature"] == doctest::Approx(0.7));
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][1]["content"] == "CONTEXT: NONE\nCURRENT_LINE: hi");

  auto ok = HttpBackend::parse_response_body(
      200, R"({"choices":[{"message":{"content":"{\"overall_category\":\"non-toxic\"}"}}],
              "usage":{"prompt_tokens":12,"completion_tokens":5}})");
  CHECK(ok.ok);
  CHECK(ok.content == "{\"overall_category\":\"non-toxic\"}");
  CHECK(ok.input_tokens == 12);
  CHECK(ok.output_tokens == 5);

  CHECK(HttpBackend::parse_response_body(429, "{}").retryable);
  CHECK(HttpBackend::parse_response_body(503, "").retryable);
  CHECK(HttpBackend::parse_response_body(408, "").retryable);
  CHECK_FALSE(HttpBackend::parse_response_body(400, "{}").retryable);
  CHECK_FALSE(HttpBackend::parse_response_body(401, "{}").ok);
  CHECK_FALSE(HttpBackend::parse_response_body(200, "not json").ok);
}

TEST_CASE("http backend needs a credential") {
  HttpBackendConfig c;
  c.api_key_env = "TOXLABEL_TEST_UNSET_KEY_VARIABLE";
  ::unsetenv(c.api_key_env.c_str());
  try {
    HttpBackend backend(c);
    FAIL("expected MissingCredential");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingCredential);
    CHECK(e.error_class() == ErrorClass::kConfig);
  }
}
