#pragma once

#include <filesystem>

#include "json.hpp"

#include "ir_agent/translator/model.hpp"
#include "ir_agent/translator/training.hpp"

namespace ir_agent::translator {

inline constexpr std::string_view kCheckpointFormat = "ir-agent-translator";
inline constexpr int kCheckpointVersion = 1;

nlohmann::json config_to_json(const TranslatorConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
TranslatorConfig config_from_json(const nlohmann::json& j);

nlohmann::json training_config_to_json(const TrainingConfig& config);
TrainingConfig training_config_from_json(const nlohmann::json& j);

/// {format, version, config, vocabulary, parameters: {tensor name: [values]}}
/// plus optional free-form metadata (training settings, history).
nlohmann::json checkpoint_to_json(const TranslatorModel& model,
                                  const nlohmann::json& metadata = nlohmann::json::object());
TranslatorModel checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const TranslatorModel& model, const std::filesystem::path& path,
                     const nlohmann::json& metadata = nlohmann::json::object());
TranslatorModel load_checkpoint(const std::filesystem::path& path);

}  // namespace ir_agent::translator
