#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "sflow/pipeline.hpp"

namespace sflow {

nlohmann::json config_to_json(const InpaintConfig& cfg);

// Fields missing from `j` keep the values already in `base`; unknown keys,
// wrong types and values failing validate() raise ErrorCode::invalid_config.
InpaintConfig config_from_json(const nlohmann::json& j, const InpaintConfig& base = {});

// Parse errors in the text raise ErrorCode::invalid_argument.
InpaintConfig parse_config(const std::string& text, const InpaintConfig& base = {});
InpaintConfig load_config(const std::filesystem::path& path);

}  // namespace sflow
