#include "toxlabel/prompting.h"

#include "toxlabel/error.h"

namespace toxlabel {

namespace detail {
extern const std::string_view kSystemPromptV1;
}

std::string_view to_string(PromptVersion v) {
  switch (v) {
    case PromptVersion::kV1: return "v1";
  }
  return "v1";
}

PromptVersion prompt_version_from_string(std::string_view s) {
  if (s == "v1") return PromptVersion::kV1;
  throw Error(ErrorCode::kUnsupportedVersion, "prompt version '" + std::string(s) + "' has no stored template");
}

std::string_view render_system_prompt(PromptVersion version) {
  switch (version) {
    case PromptVersion::kV1: return detail::kSystemPromptV1;
  }
  throw Error(ErrorCode::kUnsupportedVersion, "unknown prompt version");
}

std::string_view render_system_prompt(std::string_view version) {
  return render_system_prompt(prompt_version_from_string(version));
}

std::string render_user_message(const std::vector<std::string>& context, std::string_view text) {
  std::string out;
  if (context.empty()) {
    out = "CONTEXT: NONE\n";
  } else {
    out = "CONTEXT:\n";
    for (const auto& line : context) {
      out += line;
      out += '\n';
    }
  }
  out += "CURRENT_LINE: ";
  out += text;
  return out;
}

AnnotationRequest build_request(const ChatRecord& record, const RequestConfig& config) {
  if (trim(record.text).empty()) {
    throw Error(ErrorCode::kInvalidRequest, record.id + ": empty text");
  }
  if (!(config.temperature >= 0.0 && config.temperature <= 2.0)) {
    throw Error(ErrorCode::kInvalidRequest, "temperature must lie in [0, 2]");
  }
  AnnotationRequest req;
  req.record_id = record.id;
  req.source = record.source;
  req.temperature = config.temperature;
  req.model_name = config.model_name;
  req.prompt_version = config.prompt_version;
  req.messages.push_back({"system", std::string(render_system_prompt(config.prompt_version))});
  req.messages.push_back({"user", render_user_message(record.context, record.text)});
  return req;
}

}  // namespace toxlabel
