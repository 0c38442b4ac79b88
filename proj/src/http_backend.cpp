#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include "toxlabel/annotator.h"
#include "toxlabel/error.h"

namespace toxlabel {

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCode::kMissingCredential, "environment variable " + config_.api_key_env + " is not set");
  }
  api_key_ = key;

  const auto scheme_end = config_.url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "endpoint URL needs a scheme");
  const auto path_start = config_.url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
}

nlohmann::json HttpBackend::request_body(const AnnotationRequest& request) {
  nlohmann::json body;
  body["model"] = request.model_name;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = request.temperature;
  return body;
}

AttemptResult HttpBackend::parse_response_body(int status, const std::string& body) {
  AttemptResult r;
  if (status != 200) {
    r.error = "HTTP " + std::to_string(status);
    r.retryable = status == 408 || status == 409 || status == 429 || status >= 500;
    return r;
  }
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) {
      r.error = "completion content is not a string";
      return r;
    }
    r.content = content.get<std::string>();
    r.ok = !r.content.empty();
    if (!r.ok) r.error = "empty completion";
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
      if (u->contains("prompt_tokens")) r.input_tokens = u->at("prompt_tokens").get<std::int64_t>();
      if (u->contains("completion_tokens")) r.output_tokens = u->at("completion_tokens").get<std::int64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    r.ok = false;
    r.error = std::string("malformed completion body: ") + e.what();
  }
  return r;
}

AttemptResult HttpBackend::complete(const AnnotationRequest& request, int /*attempt*/) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(timeout, 0);
  client.set_read_timeout(timeout, 0);
  client.set_write_timeout(timeout, 0);
  client.set_bearer_token_auth(api_key_);

  auto res = client.Post(path_, request_body(request).dump(), "application/json");
  if (!res) {
    AttemptResult r;
    r.error = "transport error: " + httplib::to_string(res.error());
    r.retryable = true;
    return r;
  }
  return parse_response_body(res->status, res->body);
}

}  // namespace toxlabel
