#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "ir_agent/retriever.hpp"
#include "ir_agent/spectrum.hpp"
#include "ir_agent/translator/model.hpp"

namespace ir_agent::translator {

enum class CandidateOrigin { kBeam, kGreedySupplement, kRetrieval };

std::string_view origin_name(CandidateOrigin origin);

struct Candidate {
  std::string smiles;
  /// Summed log-probability for neural candidates, cosine similarity for retrieved ones.
  double score = 0.0;
  CandidateOrigin origin = CandidateOrigin::kBeam;
  /// Unparseable candidates are kept; downstream ranking may still use them.
  bool parseable = true;
};

struct CandidateSet {
  std::vector<Candidate> candidates;

  std::size_t size() const noexcept { return candidates.size(); }
  std::vector<std::string> smiles() const;
};

nlohmann::json candidates_to_json(const CandidateSet& set);

class CandidateGenerator {
 public:
  virtual ~CandidateGenerator() = default;
  virtual std::string name() const = 0;
  /// Exactly k candidates.
  virtual CandidateSet generate(const Spectrum& spectrum, std::size_t k) const = 0;
};

/// Beam search over the translator with greedy supplementation. The beam is
/// max(beam_width, k) wide and the first k hypotheses are returned; a zero
/// beam_width means "k".
class NeuralGenerator : public CandidateGenerator {
 public:
  explicit NeuralGenerator(std::shared_ptr<const TranslatorModel> model, std::size_t beam_width = 0);

  std::string name() const override { return "translator"; }
  CandidateSet generate(const Spectrum& spectrum, std::size_t k) const override;

 private:
  std::shared_ptr<const TranslatorModel> model_;
  std::size_t beam_width_;
};

/// The k most similar database spectra's SMILES, most similar first.
class RetrievalGenerator : public CandidateGenerator {
 public:
  RetrievalGenerator(std::shared_ptr<const SpectraDatabase> database, bool exclude_self = false);

  std::string name() const override { return "retrieval"; }
  CandidateSet generate(const Spectrum& spectrum, std::size_t k) const override;

 private:
  std::shared_ptr<const SpectraDatabase> database_;
  bool exclude_self_;
};

}  // namespace ir_agent::translator
