#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ir_agent/agents/backend.hpp"
#include "ir_agent/agents/prompts.hpp"

namespace ir_agent::agents {

struct AgentSettings {
  std::string model = "gpt-4o-mini-2024-07-18";
  double temperature = 0.8;
  /// Output budget of the TI and Ret experts.
  std::size_t expert_max_tokens = 300;
  /// Output budget of the SE and single agents; 0 leaves it to the backend.
  std::size_t final_max_tokens = 0;
  std::optional<std::uint64_t> seed;
};

/// One backend exchange, kept for audit and cost accounting.
struct AgentCall {
  AgentRole role = AgentRole::kSingle;
  RenderedPrompt prompt;
  std::string digest;
  std::string response;
  TokenUsage usage;
  /// Usage was estimated from character counts because the backend gave none.
  bool estimated = false;
  bool failed = false;
  std::string error;
};

/// ceil(characters / 4), the fallback when a backend reports no usage.
std::size_t estimate_tokens(std::string_view text);

enum class Confidence { kHigh, kMedium, kLow };
std::string_view confidence_name(Confidence c);

struct SubstructureClaim {
  std::string substructure;
  Confidence confidence = Confidence::kLow;
  std::string rationale;
};

struct Motif {
  std::string motif;
  std::string support;
};

struct ExpertAnalysis {
  AgentRole expert = AgentRole::kTableInterpretation;
  std::string text;
  std::vector<SubstructureClaim> claims;  // table interpretation expert
  std::vector<Motif> motifs;              // retrieval expert
  std::vector<std::string> warnings;
  AgentCall call;
};

/// Lines "SUBSTRUCTURE | CONFIDENCE | RATIONALE" with CONFIDENCE in high/medium/low.
std::vector<SubstructureClaim> parse_claims(std::string_view text);
/// Lines "MOTIF | SUPPORT"; a header line naming the columns is skipped.
std::vector<Motif> parse_motifs(std::string_view text);

struct SeParse {
  std::vector<std::string> ranked;
  std::size_t dropped_unparseable = 0;
  std::size_t dropped_duplicates = 0;
  std::size_t backfilled = 0;
  /// Fewer than k distinct structures were available even after back-fill.
  bool short_output = false;
};

/// Extract a ranked list from free text: numbering, bullets and markdown are
/// stripped, unparseable entries dropped, duplicates (by canonical form)
/// removed keeping the first, then back-filled from `backfill` in order and
/// truncated to k.
SeParse parse_se_output(std::string_view text, std::span<const std::string> backfill,
                        std::size_t k);

struct ElucidationResult {
  std::string spectrum_id;
  std::vector<std::string> ranked;
  std::string raw_text;
  std::vector<std::string> candidates;
  std::optional<ExpertAnalysis> ti;
  std::optional<ExpertAnalysis> ret;
  std::vector<AgentCall> calls;
  /// The final agent failed and the candidates were used as the ranking.
  bool fallback = false;
  bool short_output = false;
  std::size_t dropped_unparseable = 0;
  std::size_t dropped_duplicates = 0;
  std::size_t backfilled = 0;
  std::vector<std::string> warnings;
};

/// Inputs shared by the agents of one spectrum.
struct AgentInputs {
  std::span<const PeakAssignment> assignments;
  std::span<const RetrievalHit> hits;
  std::span<const std::string> candidates;
  ChemicalInfo info;
};

/// Throws BackendError when the backend fails.
ExpertAnalysis run_ti_expert(LlmBackend& backend, const PromptTemplate& tmpl,
                             const AgentInputs& inputs, const AgentSettings& settings);
ExpertAnalysis run_ret_expert(LlmBackend& backend, const PromptTemplate& tmpl,
                              const AgentInputs& inputs, const AgentSettings& settings);

/// Same as the two functions above (chosen by the template role) but a
/// backend failure is reported through call.failed instead of an exception.
ExpertAnalysis attempt_expert(LlmBackend& backend, const PromptTemplate& tmpl,
                              const AgentInputs& inputs, const AgentSettings& settings);

/// Missing analyses (ablations, failed experts) are rendered as unavailable.
/// A backend failure falls back to the candidate order with `fallback` set.
ElucidationResult run_se_expert(LlmBackend& backend, const PromptTemplate& tmpl,
                                const AgentInputs& inputs, const ExpertAnalysis* ti,
                                const ExpertAnalysis* ret, std::size_t k,
                                const AgentSettings& settings);

/// One agent doing every sub-task in a single call; same parsing and repair.
ElucidationResult run_single_agent(LlmBackend& backend, const PromptTemplate& tmpl,
                                   const AgentInputs& inputs, std::size_t k,
                                   const AgentSettings& settings);

struct AgentCost {
  std::size_t input_tokens = 0;
  std::size_t output_tokens = 0;
  std::size_t calls = 0;
  bool estimated = false;

  friend bool operator==(const AgentCost&, const AgentCost&) = default;
};

/// Token totals per agent key ("ti", "ret", "se", "single").
class CostLedger {
 public:
  void record(const AgentCall& call);
  void merge(const CostLedger& other);
  void add(const std::string& agent, const AgentCost& cost);
  const std::map<std::string, AgentCost>& per_agent() const noexcept { return per_agent_; }
  AgentCost total() const;
  nlohmann::json to_json() const;

 private:
  std::map<std::string, AgentCost> per_agent_;
};

CostLedger cost_ledger(const ElucidationResult& result);

nlohmann::json analysis_to_json(const ExpertAnalysis& analysis);
nlohmann::json result_to_json(const ElucidationResult& result);

}  // namespace ir_agent::agents
