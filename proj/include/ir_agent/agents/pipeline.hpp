#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>

#include "json.hpp"

#include "ir_agent/agents/experts.hpp"
#include "ir_agent/peaks.hpp"
#include "ir_agent/retriever.hpp"
#include "ir_agent/translator/generator.hpp"

namespace ir_agent::agents {

/// Which agents run: all three, one expert plus the SE agent, one combined
/// agent, or none (candidates are the answer).
enum class AblationMode { kFull, kTiOnly, kRetOnly, kSingleAgent, kNoExperts };

std::string_view mode_name(AblationMode mode);
AblationMode parse_mode(std::string_view name);
/// Backend calls one spectrum costs in this mode.
std::size_t expected_calls(AblationMode mode);

struct PipelineConfig {
  std::string backend = "mock";  // "mock" or "http"
  std::string mock_script;       // path, for the mock backend
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o-mini-2024-07-18";
  double temperature = 0.8;
  /// Length of the final ranked list.
  std::size_t k = 10;
  /// Retrieved spectra shown to the retrieval expert.
  std::size_t top_n = 10;
  /// Translator candidates handed to the agents.
  std::size_t num_candidates = 3;
  std::size_t beam_width = 3;
  AblationMode mode = AblationMode::kFull;
  ChemicalInfoKind chemical_info = ChemicalInfoKind::kNone;
  std::size_t expert_max_tokens = 300;
  double peak_height = 1.0;
  std::size_t peak_distance = 50;
  /// Hide the query's own id from retrieval (leakage audits).
  bool exclude_self = false;
  /// Run the two experts concurrently.
  bool parallel_experts = true;
  /// Forwarded to backends that accept a sampling seed.
  std::uint64_t seed = 0;

  void validate() const;
  AgentSettings agent_settings() const;
};

nlohmann::json pipeline_config_to_json(const PipelineConfig& config);
/// Missing keys keep defaults; unknown keys are rejected.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Backend named by the config. Relative mock script paths resolve against `base_dir`.
std::unique_ptr<LlmBackend> make_backend(const PipelineConfig& config,
                                         const std::filesystem::path& base_dir = {});

struct PipelineResources {
  const translator::CandidateGenerator* generator = nullptr;
  const SpectraDatabase* database = nullptr;
  std::span<const AbsorptionBand> table;
  LlmBackend* backend = nullptr;
};

/// Generator, then the table and retrieval experts (independently), then the
/// SE agent. Chemical info is derived from the spectrum's own SMILES.
ElucidationResult elucidate(const PipelineConfig& config, const PipelineResources& resources,
                            const Spectrum& spectrum);

}  // namespace ir_agent::agents
