#include "ir_agent/translator/generator.hpp"

#include <algorithm>

#include "ir_agent/error.hpp"
#include "ir_agent/smiles.hpp"
#include "ir_agent/translator/decoding.hpp"

namespace ir_agent::translator {

std::string_view origin_name(CandidateOrigin origin) {
  switch (origin) {
    case CandidateOrigin::kBeam: return "beam";
    case CandidateOrigin::kGreedySupplement: return "greedy-supplement";
    case CandidateOrigin::kRetrieval: return "retrieval";
  }
  return "beam";
}

std::vector<std::string> CandidateSet::smiles() const {
  std::vector<std::string> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.smiles);
  return out;
}

nlohmann::json candidates_to_json(const CandidateSet& set) {
  auto out = nlohmann::json::array();
  for (const auto& c : set.candidates) {
    out.push_back({{"smiles", c.smiles},
                   {"score", c.score},
                   {"origin", std::string(origin_name(c.origin))},
                   {"parseable", c.parseable}});
  }
  return out;
}

NeuralGenerator::NeuralGenerator(std::shared_ptr<const TranslatorModel> model,
                                 std::size_t beam_width)
    : model_(std::move(model)), beam_width_(beam_width) {
  if (!model_) throw DomainError("neural generator needs a model");
}

CandidateSet NeuralGenerator::generate(const Spectrum& spectrum, std::size_t k) const {
  if (k < 1) throw DomainError("candidate count must be at least 1");
  if (spectrum.mode() != IntensityMode::kAbsorbance) {
    throw DomainError("translator input must be an absorbance spectrum");
  }
  const ModelScorer scorer(*model_, spectrum.values());
  CandidateSet set;
  auto hypotheses = beam_decode(scorer, std::max(beam_width_, k));
  hypotheses.resize(k);
  for (auto& h : hypotheses) {
    Candidate c;
    c.smiles = model_->vocabulary().decode(h.tokens);
    c.score = h.score;
    c.origin = h.origin == HypothesisOrigin::kBeam ? CandidateOrigin::kBeam
                                                    : CandidateOrigin::kGreedySupplement;
    c.parseable = smiles::try_canonical(c.smiles).has_value();
    set.candidates.push_back(std::move(c));
  }
  return set;
}

RetrievalGenerator::RetrievalGenerator(std::shared_ptr<const SpectraDatabase> database,
                                       bool exclude_self)
    : database_(std::move(database)), exclude_self_(exclude_self) {
  if (!database_) throw DomainError("retrieval generator needs a database");
}

CandidateSet RetrievalGenerator::generate(const Spectrum& spectrum, std::size_t k) const {
  if (k < 1) throw DomainError("candidate count must be at least 1");
  const DatabaseView view =
      exclude_self_ ? ir_agent::exclude_self(*database_, spectrum.id()) : DatabaseView(*database_);
  if (view.size() < k) {
    throw DomainError("retrieval generator needs " + std::to_string(k) +
                      " database entries, has " + std::to_string(view.size()));
  }
  CandidateSet set;
  for (auto& hit : retrieve(view, spectrum, {.top_n = k})) {
    Candidate c;
    c.smiles = std::move(hit.smiles);
    c.score = hit.similarity;
    c.origin = CandidateOrigin::kRetrieval;
    c.parseable = smiles::try_canonical(c.smiles).has_value();
    set.candidates.push_back(std::move(c));
  }
  return set;
}

}  // namespace ir_agent::translator
