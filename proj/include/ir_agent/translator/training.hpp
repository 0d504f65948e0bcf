#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ir_agent/translator/model.hpp"

namespace ir_agent::translator {

/// Mean over examples of the summed token negative log-likelihood. PAD
/// targets are skipped. When `gradients` is given it receives dLoss/dlogits
/// for every example.
double ce_loss(std::span<const Matrix> logits, std::span<const std::vector<int>> targets,
               std::vector<Matrix>* gradients = nullptr);

/// Corpus BLEU over token sequences: 1-4-gram clipped precisions, geometric
/// mean, brevity penalty. Higher-order precisions with no match use
/// 1 / (candidates + 1); unigram precision is not smoothed.
double bleu(std::span<const std::vector<int>> hypotheses,
            std::span<const std::vector<int>> references);

enum class DecaySchedule { kInverseSqrt, kLinear };

std::string_view schedule_name(DecaySchedule schedule);
DecaySchedule parse_schedule(std::string_view name);

/// Learning-rate multiplier for 1-based `step`: step/warmup during warmup,
/// then sqrt(warmup/step) or a linear fall to zero at `total_steps`.
double lr_multiplier(std::size_t step, std::size_t warmup, DecaySchedule schedule,
                     std::size_t total_steps);

class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  /// Records the metric for `epoch`; returns true when training should stop.
  bool update(std::size_t epoch, double metric);
  /// True if the last update set a new best.
  bool improved() const noexcept { return improved_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best() const noexcept { return best_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  double best_ = 0.0;
  bool has_best_ = false;
  bool improved_ = false;
};

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t size, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);

  void step(std::span<double> parameters, std::span<const double> gradient, double lr);
  std::size_t steps() const noexcept { return t_; }

 private:
  double beta1_, beta2_, epsilon_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

struct TrainingExample {
  std::string id;
  std::vector<double> spectrum;
  std::string smiles;
};

struct TrainingConfig {
  std::size_t batch_size = 16;
  double learning_rate = 0.001;
  std::size_t warmup_steps = 8000;
  std::size_t max_epochs = 300;
  std::size_t patience = 25;
  DecaySchedule schedule = DecaySchedule::kInverseSqrt;
  std::uint64_t seed = 0;
  /// Stop once teacher-forced training accuracy reaches this value; 0 disables.
  double stop_at_train_accuracy = 0.0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;       // mean batch loss over the epoch
  double train_accuracy = 0.0;   // teacher-forced next-token accuracy after the epoch
  double valid_bleu = 0.0;       // greedy decoding against the validation references
  double learning_rate = 0.0;    // at the last step of the epoch
};

struct TrainingResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_bleu = 0.0;
  bool stopped_early = false;
  std::size_t steps = 0;
  /// Parameters after the final epoch; the model itself holds the best-BLEU ones.
  std::vector<double> last_parameters;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam training on teacher-forced next-token loss. Deterministic
/// for a given seed. The model is left holding the best validation-BLEU
/// parameters.
TrainingResult train(TranslatorModel& model, std::span<const TrainingExample> train_set,
                     std::span<const TrainingExample> valid_set, const TrainingConfig& config,
                     const EpochCallback& on_epoch = {});

/// Fraction of non-PAD target positions whose argmax logit is the target.
double next_token_accuracy(const TranslatorModel& model,
                           std::span<const TrainingExample> examples);

/// Loss and gradient over a batch (gradient sized like the parameters).
double batch_loss(const TranslatorModel& model, std::span<const TrainingExample> batch,
                  std::vector<double>* gradient);

}  // namespace ir_agent::translator
