#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "toxlabel/ingest.h"

namespace toxlabel {

enum class PromptVersion { kV1 };

std::string_view to_string(PromptVersion v);
// Throws Error(kUnsupportedVersion) for anything but "v1".
PromptVersion prompt_version_from_string(std::string_view s);

// Stored template text, returned verbatim.
std::string_view render_system_prompt(PromptVersion version);
std::string_view render_system_prompt(std::string_view version);

struct ChatMessage {
  std::string role;  // "system" | "user"
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct RequestConfig {
  PromptVersion prompt_version = PromptVersion::kV1;
  double temperature = 0.7;
  std::string model_name = "gpt-4o-mini";
};

struct AnnotationRequest {
  std::string record_id;
  std::string source;  // carried for cost breakdowns
  std::vector<ChatMessage> messages;  // exactly one system message, then one user message
  double temperature = 0.7;
  std::string model_name;
  PromptVersion prompt_version = PromptVersion::kV1;

  friend bool operator==(const AnnotationRequest&, const AnnotationRequest&) = default;
};

// User message layout:
//
//   CONTEXT:
//   <context line 1>
//   ...
//   CURRENT_LINE: <text>
//
// With no context the first line reads "CONTEXT: NONE".
std::string render_user_message(const std::vector<std::string>& context, std::string_view text);

// Throws Error(kInvalidRequest) on empty text or a temperature outside [0, 2].
AnnotationRequest build_request(const ChatRecord& record, const RequestConfig& config = {});

}  // namespace toxlabel
