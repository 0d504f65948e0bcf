#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ir_agent/translator/model.hpp"

namespace ir_agent::translator {

/// Next-token distribution source for decoding. Log-probabilities of -inf
/// mark tokens that may not be emitted.
class StepScorer {
 public:
  virtual ~StepScorer() = default;

  virtual std::size_t vocabulary_size() const = 0;
  /// End-of-sequence token, or nullopt when sequences only end at max_length().
  virtual std::optional<int> eos() const = 0;
  /// Maximum number of emitted tokens, EOS included.
  virtual std::size_t max_length() const = 0;
  virtual std::vector<double> next_log_probs(std::span<const int> prefix) const = 0;
};

/// Scores with a trained model over one encoded spectrum. BOS, PAD and UNK
/// are never emitted.
class ModelScorer : public StepScorer {
 public:
  ModelScorer(const TranslatorModel& model, std::span<const double> spectrum);

  std::size_t vocabulary_size() const override { return model_.vocabulary().size(); }
  std::optional<int> eos() const override { return TokenVocabulary::kEos; }
  std::size_t max_length() const override { return model_.config().max_target_len; }
  std::vector<double> next_log_probs(std::span<const int> prefix) const override;

 private:
  const TranslatorModel& model_;
  Matrix memory_;
};

enum class HypothesisOrigin { kBeam, kGreedySupplement };

struct Hypothesis {
  /// Emitted tokens without the terminating EOS.
  std::vector<int> tokens;
  /// Summed log-probability, EOS included when it was emitted.
  double score = 0.0;
  bool ended_with_eos = false;
  HypothesisOrigin origin = HypothesisOrigin::kBeam;
};

/// Log-softmax of one row of logits.
std::vector<double> log_softmax(std::span<const double> logits);

/// Highest-probability token at each step (ties to the lower id).
Hypothesis greedy_decode(const StepScorer& scorer, std::span<const int> forced_prefix = {});

/// Length-bounded beam search with raw summed log-probabilities. Returns
/// exactly `width` hypotheses: completed beams sorted by score, then greedy
/// supplements that diverge from everything already emitted.
std::vector<Hypothesis> beam_decode(const StepScorer& scorer, std::size_t width);

}  // namespace ir_agent::translator
