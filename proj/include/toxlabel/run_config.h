#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "toxlabel/annotator.h"
#include "toxlabel/prompting.h"
#include "toxlabel/sampler.h"
#include "toxlabel/softprompt.h"

namespace toxlabel {

struct RunConfig {
  std::filesystem::path registry;
  std::optional<std::filesystem::path> taxonomy;  // built-in when absent
  PromptVersion prompt_version = PromptVersion::kV1;
  double temperature = 0.7;
  std::string model = "gpt-4o-mini";
  HttpBackendConfig endpoint;
  std::size_t parallelism = 8;
  int max_attempts = 3;
  std::int64_t backoff_base_ms = 500;
  std::int64_t backoff_cap_ms = 30000;
  PricingConfig pricing;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> mock_fixture;  // echo mock when absent
  std::filesystem::path out_dir = "out";
  bool include_spans = false;

  std::int64_t sample_base_target = 50;
  SpilloverFractions spillover;

  Placement placement = Placement::kBeforeContext;
  std::int64_t max_len = kDefaultMaxLength;
  std::map<std::string, GameToken, std::less<>> token_map;

  // Relative paths resolve against `base_dir`. Throws Error(kInvalidConfig) for
  // malformed values or a referenced file that does not exist.
  static RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
  static RunConfig from_file(const std::filesystem::path& path);

  std::filesystem::path base_dir;  // directory of the config file

  // Paths are written relative to base_dir and out_dir is left out, so the
  // document and its hash do not depend on where a run happens.
  nlohmann::ordered_json to_json() const;
  // sha256 of the compact to_json() dump; recorded in every manifest.
  std::string hash() const;

  RequestConfig request_config() const;
  BatchOptions batch_options() const;
};

}  // namespace toxlabel
