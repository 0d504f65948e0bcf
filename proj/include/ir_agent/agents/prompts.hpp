#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ir_agent/peaks.hpp"
#include "ir_agent/retriever.hpp"

namespace ir_agent::agents {

enum class AgentRole { kTableInterpretation, kRetrieval, kStructureElucidation, kSingle };

/// Short key used in ledgers, mock scripts and JSON ("ti", "ret", "se", "single").
std::string_view role_key(AgentRole role);

/// Slot names a template may reference as {name}.
inline const std::vector<std::string> kPromptSlots = {
    "peak_interpretations", "candidates", "retrieval_hits", "ti_analysis",
    "ret_analysis",         "chemical_info", "k"};

struct RenderedPrompt {
  std::string system;
  std::string user;

  std::string digest() const;
};

struct PromptTemplate {
  AgentRole role = AgentRole::kSingle;
  std::string system;
  std::string user;

  /// Substitutes every {slot}; a referenced slot missing from `values` is an error.
  RenderedPrompt render(const std::map<std::string, std::string>& values) const;
  /// Slots the user text references, in order of first use.
  std::vector<std::string> referenced_slots() const;
};

const PromptTemplate& default_template(AgentRole role);

enum class ChemicalInfoKind { kNone, kAtomTypes, kScaffold, kCarbonCount };

std::string_view chemical_info_name(ChemicalInfoKind kind);
ChemicalInfoKind parse_chemical_info(std::string_view name);

struct ChemicalInfo {
  ChemicalInfoKind kind = ChemicalInfoKind::kNone;
  std::string payload;

  /// The single sentence appended to prompts; empty for kNone.
  std::string sentence() const;
  /// Derived from a known structure. Acyclic molecules have no scaffold and
  /// yield kNone for that kind.
  static ChemicalInfo from_smiles(ChemicalInfoKind kind, std::string_view smiles);
};

// Slot renderers. All output is byte-deterministic.
std::string render_peak_interpretations(std::span<const PeakAssignment> assignments);
std::string render_candidates(std::span<const std::string> candidates);
/// "smiles : 0.1234" per line; hits must be sorted by similarity descending.
std::string render_retrieval_hits(std::span<const RetrievalHit> hits);
/// Empty for kNone, otherwise a newline and the sentence.
std::string render_chemical_info(const ChemicalInfo& info);

}  // namespace ir_agent::agents
