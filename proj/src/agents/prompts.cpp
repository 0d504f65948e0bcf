#include "ir_agent/agents/prompts.hpp"

#include <algorithm>
#include <cstdio>

#include "ir_agent/agents/backend.hpp"
#include "ir_agent/error.hpp"
#include "ir_agent/smiles.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent::agents {

std::string_view role_key(AgentRole role) {
  switch (role) {
    case AgentRole::kTableInterpretation: return "ti";
    case AgentRole::kRetrieval: return "ret";
    case AgentRole::kStructureElucidation: return "se";
    case AgentRole::kSingle: return "single";
  }
  return "single";
}

std::string RenderedPrompt::digest() const { return prompt_digest(system, user); }

namespace {

bool is_slot(std::string_view name) {
  return std::find(kPromptSlots.begin(), kPromptSlots.end(), name) != kPromptSlots.end();
}

/// Calls on_text for literal runs and on_slot for each {slot} reference.
template <typename Text, typename Slot>
void scan(std::string_view text, Text on_text, Slot on_slot) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find('}', open);
    if (close == std::string_view::npos) break;
    const auto name = text.substr(open + 1, close - open - 1);
    if (!is_slot(name)) {
      on_text(text.substr(pos, open + 1 - pos));
      pos = open + 1;
      continue;
    }
    on_text(text.substr(pos, open - pos));
    on_slot(name);
    pos = close + 1;
  }
  on_text(text.substr(pos));
}

}  // namespace

RenderedPrompt PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  std::string user_text;
  scan(
      user, [&](std::string_view t) { user_text.append(t); },
      [&](std::string_view name) {
        const auto it = values.find(std::string(name));
        if (it == values.end()) {
          throw DomainError("prompt slot {" + std::string(name) + "} of the " +
                            std::string(role_key(role)) + " template is not filled");
        }
        user_text.append(it->second);
      });
  return {system, std::move(user_text)};
}

std::vector<std::string> PromptTemplate::referenced_slots() const {
  std::vector<std::string> out;
  scan(
      user, [](std::string_view) {},
      [&](std::string_view name) {
        if (std::find(out.begin(), out.end(), name) == out.end()) out.emplace_back(name);
      });
  return out;
}

namespace {

const std::string kOutputRules =
    "Return exactly {k} distinct SMILES strings ranked from most to least likely, one per line, "
    "in the form\n"
    "1. SMILES\n"
    "Do not add any other text.";

PromptTemplate make_ti() {
  return {AgentRole::kTableInterpretation,
          "You are an expert in infrared spectroscopy. You interpret absorption peaks with an "
          "IR absorption table and check the result against candidate molecular structures.",
          "Peak table interpretation of the target spectrum:\n"
          "{peak_interpretations}\n\n"
          "Candidate structures from the spectrum translator:\n"
          "{candidates}\n\n"
          "Table ranges overlap, so a peak can point to several functional groups. Compare the "
          "interpretation with the candidates and keep the substructures that the peaks and the "
          "candidates support together. Write one line per substructure in the form\n"
          "SUBSTRUCTURE | CONFIDENCE | RATIONALE\n"
          "where CONFIDENCE is high, medium or low and RATIONALE is one short sentence. "
          "Keep the answer brief.{chemical_info}"};
}

PromptTemplate make_ret() {
  return {AgentRole::kRetrieval,
          "You are an expert in infrared spectroscopy and structural chemistry. You analyze "
          "molecules whose reference spectra resemble a target spectrum.",
          "Molecules with the most similar reference spectra, as SMILES : cosine similarity:\n"
          "{retrieval_hits}\n\n"
          "Identify structural features these molecules share. Molecules with higher similarity "
          "should weigh more. Write one line per feature in the form\n"
          "MOTIF | SUPPORT\n"
          "where SUPPORT states which of the listed molecules contain it. "
          "Keep the answer brief.{chemical_info}"};
}

PromptTemplate make_se() {
  return {AgentRole::kStructureElucidation,
          "You are an expert chemist who determines molecular structures from infrared spectra "
          "by combining the analyses of other specialists.",
          "Candidate structures from the spectrum translator:\n"
          "{candidates}\n\n"
          "Analysis of the absorption-table interpretation:\n"
          "{ti_analysis}\n\n"
          "Analysis of spectra retrieved from the reference database:\n"
          "{ret_analysis}\n\n"
          "Use both analyses to judge the candidates. You may reorder or edit them or propose "
          "other structures. " + kOutputRules + "{chemical_info}"};
}

PromptTemplate make_single() {
  return {AgentRole::kSingle,
          "You are an expert chemist who determines molecular structures from infrared spectra.",
          "Peak table interpretation of the target spectrum:\n"
          "{peak_interpretations}\n\n"
          "Molecules with the most similar reference spectra, as SMILES : cosine similarity:\n"
          "{retrieval_hits}\n\n"
          "Candidate structures from the spectrum translator:\n"
          "{candidates}\n\n"
          "Check which functional groups the peaks support, which motifs the similar molecules "
          "share, and how well each candidate fits. " + kOutputRules + "{chemical_info}"};
}

}  // namespace

const PromptTemplate& default_template(AgentRole role) {
  static const PromptTemplate ti = make_ti();
  static const PromptTemplate ret = make_ret();
  static const PromptTemplate se = make_se();
  static const PromptTemplate single = make_single();
  switch (role) {
    case AgentRole::kTableInterpretation: return ti;
    case AgentRole::kRetrieval: return ret;
    case AgentRole::kStructureElucidation: return se;
    case AgentRole::kSingle: return single;
  }
  return single;
}

std::string_view chemical_info_name(ChemicalInfoKind kind) {
  switch (kind) {
    case ChemicalInfoKind::kNone: return "none";
    case ChemicalInfoKind::kAtomTypes: return "atom_types";
    case ChemicalInfoKind::kScaffold: return "scaffold";
    case ChemicalInfoKind::kCarbonCount: return "carbon_count";
  }
  return "none";
}

ChemicalInfoKind parse_chemical_info(std::string_view name) {
  for (const auto kind : {ChemicalInfoKind::kNone, ChemicalInfoKind::kAtomTypes,
                          ChemicalInfoKind::kScaffold, ChemicalInfoKind::kCarbonCount}) {
    if (chemical_info_name(kind) == name) return kind;
  }
  throw DomainError("unknown chemical info kind '" + std::string(name) + "'");
}

std::string ChemicalInfo::sentence() const {
  switch (kind) {
    case ChemicalInfoKind::kNone: return "";
    case ChemicalInfoKind::kAtomTypes:
      return "The molecule contains only these atom types: " + payload + ".";
    case ChemicalInfoKind::kScaffold: return "The molecule has the scaffold: " + payload + ".";
    case ChemicalInfoKind::kCarbonCount:
      return "The molecule contains exactly " + payload + " carbon atoms.";
  }
  return "";
}

ChemicalInfo ChemicalInfo::from_smiles(ChemicalInfoKind kind, std::string_view text) {
  if (kind == ChemicalInfoKind::kNone) return {};
  const auto graph = smiles::parse(text);
  switch (kind) {
    case ChemicalInfoKind::kAtomTypes: {
      std::string list;
      for (const auto& e : smiles::element_types(graph)) {
        if (!list.empty()) list += ", ";
        list += e;
      }
      return {kind, list};
    }
    case ChemicalInfoKind::kScaffold: {
      const auto scaffold = smiles::ring_scaffold(graph);
      if (scaffold.atom_count() == 0) return {};
      return {kind, smiles::canonicalize(scaffold).text};
    }
    case ChemicalInfoKind::kCarbonCount:
      return {kind, std::to_string(smiles::count_element(graph, "C"))};
    case ChemicalInfoKind::kNone: break;
  }
  return {};
}

std::string render_peak_interpretations(std::span<const PeakAssignment> assignments) {
  if (assignments.empty()) return "No peaks reach the height threshold.";
  std::string out;
  for (const auto& a : assignments) {
    if (!out.empty()) out += '\n';
    char absorbance[32];
    std::snprintf(absorbance, sizeof absorbance, "%.3f", a.peak.absorbance);
    out += "Peak at " + util::format_number(a.peak.wavenumber) + " cm-1 (absorbance " +
           absorbance + "):";
    for (const auto& line : a.interpretation) out += " " + line;
  }
  return out;
}

std::string render_candidates(std::span<const std::string> candidates) {
  std::string out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i > 0) out += '\n';
    out += std::to_string(i + 1) + ". " + candidates[i];
  }
  return out;
}

std::string render_retrieval_hits(std::span<const RetrievalHit> hits) {
  if (hits.empty()) throw DomainError("no retrieval hits to render");
  std::string out;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (i > 0 && hits[i].similarity > hits[i - 1].similarity) {
      throw DomainError("retrieval hits are not sorted by similarity (position " +
                        std::to_string(i) + ")");
    }
    char sim[32];
    std::snprintf(sim, sizeof sim, "%.4f", hits[i].similarity);
    if (i > 0) out += '\n';
    out += hits[i].smiles + " : " + sim;
  }
  return out;
}

std::string render_chemical_info(const ChemicalInfo& info) {
  const std::string s = info.sentence();
  return s.empty() ? s : "\n" + s;
}

}  // namespace ir_agent::agents
