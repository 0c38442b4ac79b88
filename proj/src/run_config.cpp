#include "toxlabel/run_config.h"

#include <fstream>
#include <set>

#include "toxlabel/error.h"
#include "toxlabel/hashing.h"

namespace toxlabel {

namespace {

namespace fs = std::filesystem;

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() ? (base / path).lexically_normal() : path.lexically_normal();
}

std::string config_path(const fs::path& base, const fs::path& p) {
  if (base.empty()) return p.generic_string();
  auto rel = p.lexically_relative(base);
  return rel.empty() ? p.generic_string() : rel.generic_string();
}

void require_file(const fs::path& p, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) {
    throw Error(ErrorCode::kInvalidConfig, std::string(what) + " not found: " + p.string());
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, _] : j.items()) {
    if (!known.contains(k)) throw Error(ErrorCode::kInvalidConfig, "unknown key '" + k + "' in " + where);
  }
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");
  reject_unknown(doc,
                 {"registry", "taxonomy", "prompt_version", "temperature", "model", "endpoint", "parallelism",
                  "max_attempts", "backoff_base_ms", "backoff_cap_ms", "pricing", "seed", "mock_fixture", "out_dir",
                  "include_spans", "sampler", "softprompt"},
                 "config");
  RunConfig c;
  c.base_dir = base_dir.lexically_normal();
  try {
    if (!doc.contains("registry")) throw Error(ErrorCode::kInvalidConfig, "config lacks 'registry'");
    c.registry = resolve(base_dir, doc.at("registry").get<std::string>());
    require_file(c.registry, "registry");
    if (doc.contains("taxonomy") && !doc.at("taxonomy").is_null()) {
      c.taxonomy = resolve(base_dir, doc.at("taxonomy").get<std::string>());
      require_file(*c.taxonomy, "taxonomy");
    }
    if (doc.contains("mock_fixture") && !doc.at("mock_fixture").is_null()) {
      c.mock_fixture = resolve(base_dir, doc.at("mock_fixture").get<std::string>());
      require_file(*c.mock_fixture, "mock fixture");
    }
    c.prompt_version = prompt_version_from_string(get_or<std::string>(doc, "prompt_version", "v1"));
    c.temperature = get_or(doc, "temperature", c.temperature);
    if (c.temperature < 0.0 || c.temperature > 2.0) {
      throw Error(ErrorCode::kInvalidConfig, "temperature must lie in [0, 2]");
    }
    c.model = get_or(doc, "model", c.model);
    if (doc.contains("endpoint")) {
      const auto& e = doc.at("endpoint");
      reject_unknown(e, {"url", "api_key_env", "timeout_s"}, "endpoint");
      c.endpoint.url = get_or(e, "url", c.endpoint.url);
      c.endpoint.api_key_env = get_or(e, "api_key_env", c.endpoint.api_key_env);
      c.endpoint.timeout = std::chrono::seconds(get_or<std::int64_t>(e, "timeout_s", c.endpoint.timeout.count()));
    }
    const auto parallelism = get_or<std::int64_t>(doc, "parallelism", static_cast<std::int64_t>(c.parallelism));
    if (parallelism < 1) throw Error(ErrorCode::kInvalidConfig, "parallelism must be at least 1");
    c.parallelism = static_cast<std::size_t>(parallelism);
    c.max_attempts = get_or(doc, "max_attempts", c.max_attempts);
    if (c.max_attempts < 1) throw Error(ErrorCode::kInvalidConfig, "max_attempts must be at least 1");
    c.backoff_base_ms = get_or(doc, "backoff_base_ms", c.backoff_base_ms);
    c.backoff_cap_ms = get_or(doc, "backoff_cap_ms", c.backoff_cap_ms);
    if (c.backoff_base_ms < 0 || c.backoff_cap_ms < 0) throw Error(ErrorCode::kInvalidConfig, "backoff must be >= 0");
    if (doc.contains("pricing")) {
      const auto& p = doc.at("pricing");
      reject_unknown(p, {"input_price_per_million", "output_price_per_million", "expected_output_tokens"}, "pricing");
      c.pricing.input_price_per_million = get_or(p, "input_price_per_million", c.pricing.input_price_per_million);
      c.pricing.output_price_per_million = get_or(p, "output_price_per_million", c.pricing.output_price_per_million);
      c.pricing.expected_output_tokens = get_or(p, "expected_output_tokens", c.pricing.expected_output_tokens);
    }
    c.seed = get_or<std::uint64_t>(doc, "seed", 0);
    c.out_dir = resolve(base_dir, get_or<std::string>(doc, "out_dir", "out"));
    c.include_spans = get_or(doc, "include_spans", false);
    if (doc.contains("sampler")) {
      const auto& s = doc.at("sampler");
      reject_unknown(s, {"base_target", "to_next_toxic", "to_non_toxic"}, "sampler");
      c.sample_base_target = get_or(s, "base_target", c.sample_base_target);
      c.spillover.to_next_toxic = get_or(s, "to_next_toxic", c.spillover.to_next_toxic);
      c.spillover.to_non_toxic = get_or(s, "to_non_toxic", c.spillover.to_non_toxic);
    }
    if (doc.contains("softprompt")) {
      const auto& s = doc.at("softprompt");
      reject_unknown(s, {"placement", "max_len", "token_map"}, "softprompt");
      c.placement = placement_from_string(get_or<std::string>(s, "placement", "before_context"));
      c.max_len = get_or(s, "max_len", c.max_len);
      if (c.max_len < 3) throw Error(ErrorCode::kInvalidConfig, "max_len must be at least 3");
      if (s.contains("token_map")) {
        for (const auto& [origin, token] : s.at("token_map").items()) {
          auto t = game_token_from_string(token.get<std::string>());
          if (!t) throw Error(ErrorCode::kInvalidConfig, "unknown game token '" + token.get<std::string>() + "'");
          c.token_map.emplace(origin, *t);
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  } catch (const Error& e) {
    if (e.error_class() == ErrorClass::kConfig) throw;
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  return c;
}

RunConfig RunConfig::from_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "config not found: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
  return from_json(doc, path.parent_path());
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["registry"] = config_path(base_dir, registry);
  j["taxonomy"] = taxonomy ? nlohmann::ordered_json(config_path(base_dir, *taxonomy)) : nlohmann::ordered_json();
  j["prompt_version"] = to_string(prompt_version);
  j["temperature"] = temperature;
  j["model"] = model;
  j["endpoint"] = {{"url", endpoint.url}, {"api_key_env", endpoint.api_key_env},
                   {"timeout_s", endpoint.timeout.count()}};
  j["parallelism"] = parallelism;
  j["max_attempts"] = max_attempts;
  j["backoff_base_ms"] = backoff_base_ms;
  j["backoff_cap_ms"] = backoff_cap_ms;
  j["pricing"] = {{"input_price_per_million", pricing.input_price_per_million},
                  {"output_price_per_million", pricing.output_price_per_million},
                  {"expected_output_tokens", pricing.expected_output_tokens}};
  j["seed"] = seed;
  j["mock_fixture"] =
      mock_fixture ? nlohmann::ordered_json(config_path(base_dir, *mock_fixture)) : nlohmann::ordered_json();
  j["include_spans"] = include_spans;
  j["sampler"] = {{"base_target", sample_base_target},
                  {"to_next_toxic", spillover.to_next_toxic},
                  {"to_non_toxic", spillover.to_non_toxic}};
  nlohmann::ordered_json tokens = nlohmann::ordered_json::object();
  for (const auto& [origin, t] : token_map) tokens[origin] = to_string(t);
  j["softprompt"] = {{"placement", to_string(placement)}, {"max_len", max_len}, {"token_map", tokens}};
  return j;
}

std::string RunConfig::hash() const { return sha256_hex(to_json().dump()); }

RequestConfig RunConfig::request_config() const { return {prompt_version, temperature, model}; }

BatchOptions RunConfig::batch_options() const {
  BatchOptions o;
  o.parallelism = parallelism;
  o.max_attempts = max_attempts;
  o.backoff_base = std::chrono::milliseconds(backoff_base_ms);
  o.backoff_cap = std::chrono::milliseconds(backoff_cap_ms);
  o.seed = seed;
  return o;
}

}  // namespace toxlabel
