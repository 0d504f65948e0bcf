#include "ir_agent/agents/pipeline.hpp"

#include <future>
#include <set>

#include "ir_agent/error.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent::agents {

std::string_view mode_name(AblationMode mode) {
  switch (mode) {
    case AblationMode::kFull: return "full";
    case AblationMode::kTiOnly: return "ti-only";
    case AblationMode::kRetOnly: return "ret-only";
    case AblationMode::kSingleAgent: return "single-agent";
    case AblationMode::kNoExperts: return "no-experts";
  }
  return "full";
}

AblationMode parse_mode(std::string_view name) {
  for (const auto m : {AblationMode::kFull, AblationMode::kTiOnly, AblationMode::kRetOnly,
                       AblationMode::kSingleAgent, AblationMode::kNoExperts}) {
    if (mode_name(m) == name) return m;
  }
  throw DomainError("unknown mode '" + std::string(name) +
                    "' (full, ti-only, ret-only, single-agent, no-experts)");
}

std::size_t expected_calls(AblationMode mode) {
  switch (mode) {
    case AblationMode::kFull: return 3;
    case AblationMode::kTiOnly:
    case AblationMode::kRetOnly: return 2;
    case AblationMode::kSingleAgent: return 1;
    case AblationMode::kNoExperts: return 0;
  }
  return 0;
}

void PipelineConfig::validate() const {
  if (backend != "mock" && backend != "http") {
    throw DomainError("backend must be 'mock' or 'http', got '" + backend + "'");
  }
  if (k == 0 || top_n == 0 || num_candidates == 0 || beam_width == 0 || peak_distance == 0) {
    throw DomainError("k, top_n, num_candidates, beam_width and peak_distance must be positive");
  }
  if (!(temperature >= 0.0)) throw DomainError("temperature must be non-negative");
}

AgentSettings PipelineConfig::agent_settings() const {
  AgentSettings s;
  s.model = model;
  s.temperature = temperature;
  s.expert_max_tokens = expert_max_tokens;
  s.seed = seed;
  return s;
}

nlohmann::json pipeline_config_to_json(const PipelineConfig& c) {
  return {{"backend", c.backend},
          {"mock_script", c.mock_script},
          {"endpoint", c.endpoint},
          {"model", c.model},
          {"temperature", c.temperature},
          {"k", c.k},
          {"top_n", c.top_n},
          {"num_candidates", c.num_candidates},
          {"beam_width", c.beam_width},
          {"mode", std::string(mode_name(c.mode))},
          {"chemical_info", std::string(chemical_info_name(c.chemical_info))},
          {"expert_max_tokens", c.expert_max_tokens},
          {"peak_height", c.peak_height},
          {"peak_distance", c.peak_distance},
          {"exclude_self", c.exclude_self},
          {"parallel_experts", c.parallel_experts},
          {"seed", c.seed}};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("pipeline config must be a JSON object");
  const PipelineConfig defaults;
  const auto known = pipeline_config_to_json(defaults);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw SchemaError("unknown pipeline config key '" + key + "'");
  }
  nlohmann::json merged = known;
  merged.update(j);
  PipelineConfig c;
  try {
    c.backend = merged.at("backend").get<std::string>();
    c.mock_script = merged.at("mock_script").get<std::string>();
    c.endpoint = merged.at("endpoint").get<std::string>();
    c.model = merged.at("model").get<std::string>();
    c.temperature = merged.at("temperature").get<double>();
    c.k = merged.at("k").get<std::size_t>();
    c.top_n = merged.at("top_n").get<std::size_t>();
    c.num_candidates = merged.at("num_candidates").get<std::size_t>();
    c.beam_width = merged.at("beam_width").get<std::size_t>();
    c.mode = parse_mode(merged.at("mode").get<std::string>());
    c.chemical_info = parse_chemical_info(merged.at("chemical_info").get<std::string>());
    c.expert_max_tokens = merged.at("expert_max_tokens").get<std::size_t>();
    c.peak_height = merged.at("peak_height").get<double>();
    c.peak_distance = merged.at("peak_distance").get<std::size_t>();
    c.exclude_self = merged.at("exclude_self").get<bool>();
    c.parallel_experts = merged.at("parallel_experts").get<bool>();
    c.seed = merged.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("pipeline config: ") + e.what());
  } catch (const DomainError& e) {
    throw SchemaError(std::string("pipeline config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  try {
    return pipeline_config_from_json(nlohmann::json::parse(util::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::unique_ptr<LlmBackend> make_backend(const PipelineConfig& config,
                                         const std::filesystem::path& base_dir) {
  if (config.backend == "http") {
    HttpBackendConfig http;
    http.endpoint = config.endpoint;
    return std::make_unique<HttpChatBackend>(http);
  }
  if (config.mock_script.empty()) return std::make_unique<ScriptedMockBackend>();
  std::filesystem::path script(config.mock_script);
  if (script.is_relative() && !base_dir.empty()) script = base_dir / script;
  return std::make_unique<ScriptedMockBackend>(ScriptedMockBackend::load(script));
}

ElucidationResult elucidate(const PipelineConfig& config, const PipelineResources& res,
                            const Spectrum& spectrum) {
  config.validate();
  if (res.generator == nullptr) throw DomainError("pipeline has no candidate generator");
  const AblationMode mode = config.mode;
  const bool needs_backend = mode != AblationMode::kNoExperts;
  const bool needs_retrieval = mode == AblationMode::kFull || mode == AblationMode::kRetOnly ||
                               mode == AblationMode::kSingleAgent;
  if (needs_backend && res.backend == nullptr) throw DomainError("pipeline has no LLM backend");
  if (needs_retrieval && res.database == nullptr) {
    throw DomainError("mode " + std::string(mode_name(mode)) + " needs a spectra database");
  }
  if (spectrum.mode() != IntensityMode::kAbsorbance) {
    throw DomainError("elucidation expects an absorbance spectrum; run preprocess first");
  }

  const auto candidate_set = res.generator->generate(spectrum, config.num_candidates);
  const auto candidates = candidate_set.smiles();

  ElucidationResult result;
  if (mode == AblationMode::kNoExperts) {
    result.candidates = candidates;
    result.ranked = candidates;
    result.short_output = result.ranked.size() < config.k;
    result.spectrum_id = spectrum.id();
    return result;
  }

  ChemicalInfo info;
  if (config.chemical_info != ChemicalInfoKind::kNone) {
    if (!spectrum.smiles()) {
      throw DomainError("chemical info needs the structure of spectrum '" + spectrum.id() + "'");
    }
    info = ChemicalInfo::from_smiles(config.chemical_info, *spectrum.smiles());
  }

  std::vector<PeakAssignment> assignments;
  if (mode != AblationMode::kRetOnly) {
    assignments = assign(find_peaks(spectrum, {config.peak_height, config.peak_distance}), res.table);
  }
  std::vector<RetrievalHit> hits;
  if (res.database != nullptr) {
    const DatabaseView view = config.exclude_self ? exclude_self(*res.database, spectrum.id())
                                                  : DatabaseView(*res.database);
    hits = retrieve(view, spectrum, {.top_n = config.top_n});
  }

  const AgentInputs inputs{assignments, hits, candidates, info};
  const AgentSettings settings = config.agent_settings();
  LlmBackend& backend = *res.backend;

  if (mode == AblationMode::kSingleAgent) {
    result = run_single_agent(backend, default_template(AgentRole::kSingle), inputs, config.k,
                              settings);
  } else {
    const bool want_ti = mode == AblationMode::kFull || mode == AblationMode::kTiOnly;
    const bool want_ret = mode == AblationMode::kFull || mode == AblationMode::kRetOnly;
    auto run = [&](AgentRole role) {
      return attempt_expert(backend, default_template(role), inputs, settings);
    };
    std::optional<ExpertAnalysis> ti;
    std::optional<ExpertAnalysis> ret;
    if (want_ti && want_ret && config.parallel_experts) {
      auto ti_future = std::async(std::launch::async, run, AgentRole::kTableInterpretation);
      auto ret_future = std::async(std::launch::async, run, AgentRole::kRetrieval);
      ti = ti_future.get();
      ret = ret_future.get();
    } else {
      if (want_ti) ti = run(AgentRole::kTableInterpretation);
      if (want_ret) ret = run(AgentRole::kRetrieval);
    }
    std::vector<AgentCall> failed;
    std::vector<std::string> warnings;
    for (auto* a : {&ti, &ret}) {
      if (*a && (*a)->call.failed) {
        warnings.push_back(std::string(role_key((*a)->expert)) + " expert failed: " +
                           (*a)->call.error);
        failed.push_back((*a)->call);
        a->reset();
      }
    }
    result = run_se_expert(backend, default_template(AgentRole::kStructureElucidation), inputs,
                           ti ? &*ti : nullptr, ret ? &*ret : nullptr, config.k, settings);
    result.calls.insert(result.calls.begin(), failed.begin(), failed.end());
    result.warnings.insert(result.warnings.begin(), warnings.begin(), warnings.end());
  }
  result.spectrum_id = spectrum.id();
  return result;
}

}  // namespace ir_agent::agents
