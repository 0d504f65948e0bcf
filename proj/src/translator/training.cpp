#include "ir_agent/translator/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "ir_agent/error.hpp"
#include "ir_agent/translator/decoding.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent::translator {

double ce_loss(std::span<const Matrix> logits, std::span<const std::vector<int>> targets,
               std::vector<Matrix>* gradients) {
  if (logits.empty()) throw DomainError("loss over an empty batch");
  if (logits.size() != targets.size()) {
    throw DomainError("batch has " + std::to_string(logits.size()) + " logit blocks but " +
                      std::to_string(targets.size()) + " target sequences");
  }
  const double n = static_cast<double>(logits.size());
  if (gradients != nullptr) gradients->assign(logits.size(), Matrix());
  double total = 0.0;
  for (std::size_t e = 0; e < logits.size(); ++e) {
    const Matrix& z = logits[e];
    const auto& y = targets[e];
    if (static_cast<std::size_t>(z.rows()) != y.size()) {
      throw DomainError("example " + std::to_string(e) + ": logits rows do not match targets");
    }
    Matrix grad;
    if (gradients != nullptr) grad = Matrix::Zero(z.rows(), z.cols());
    double example_sum = 0.0;
    for (Eigen::Index t = 0; t < z.rows(); ++t) {
      const int target = y[static_cast<std::size_t>(t)];
      if (target == TokenVocabulary::kPad) continue;
      if (target < 0 || target >= z.cols()) throw DomainError("target id outside vocabulary");
      const double max = z.row(t).maxCoeff();
      const double log_z = max + std::log((z.row(t).array() - max).exp().sum());
      example_sum += log_z - z(t, target);
      if (gradients != nullptr) {
        grad.row(t) = (z.row(t).array() - log_z).exp() / n;
        grad(t, target) -= 1.0 / n;
      }
    }
    total += example_sum;
    if (gradients != nullptr) (*gradients)[e] = std::move(grad);
  }
  return total / n;
}

double bleu(std::span<const std::vector<int>> hypotheses,
            std::span<const std::vector<int>> references) {
  if (hypotheses.empty()) throw DomainError("BLEU over an empty corpus");
  if (hypotheses.size() != references.size()) {
    throw DomainError("BLEU needs one reference per hypothesis");
  }
  constexpr std::size_t kMaxOrder = 4;
  std::array<double, kMaxOrder> matches{};
  std::array<double, kMaxOrder> totals{};
  double hyp_len = 0.0;
  double ref_len = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto& hyp = hypotheses[i];
    const auto& ref = references[i];
    hyp_len += static_cast<double>(hyp.size());
    ref_len += static_cast<double>(ref.size());
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      std::map<std::vector<int>, int> ref_counts;
      for (std::size_t s = 0; s + n <= ref.size(); ++s) {
        ++ref_counts[std::vector<int>(ref.begin() + static_cast<std::ptrdiff_t>(s),
                                      ref.begin() + static_cast<std::ptrdiff_t>(s + n))];
      }
      std::map<std::vector<int>, int> hyp_counts;
      for (std::size_t s = 0; s + n <= hyp.size(); ++s) {
        ++hyp_counts[std::vector<int>(hyp.begin() + static_cast<std::ptrdiff_t>(s),
                                      hyp.begin() + static_cast<std::ptrdiff_t>(s + n))];
        totals[n - 1] += 1.0;
      }
      for (const auto& [gram, count] : hyp_counts) {
        const auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
      }
    }
  }
  if (hyp_len == 0.0 || matches[0] == 0.0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    const double p = (n > 0 && matches[n] == 0.0) ? 1.0 / (totals[n] + 1.0)
                                                  : matches[n] / totals[n];
    log_sum += std::log(p);
  }
  const double brevity = hyp_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
  return brevity * std::exp(log_sum / static_cast<double>(kMaxOrder));
}

std::string_view schedule_name(DecaySchedule schedule) {
  return schedule == DecaySchedule::kLinear ? "linear" : "inverse-sqrt";
}

DecaySchedule parse_schedule(std::string_view name) {
  if (name == "inverse-sqrt") return DecaySchedule::kInverseSqrt;
  if (name == "linear") return DecaySchedule::kLinear;
  throw DomainError("unknown schedule '" + std::string(name) + "'");
}

double lr_multiplier(std::size_t step, std::size_t warmup, DecaySchedule schedule,
                     std::size_t total_steps) {
  if (warmup == 0) throw DomainError("warmup steps must be positive");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(warmup);
  if (step <= warmup) return s / w;
  if (schedule == DecaySchedule::kInverseSqrt) return std::sqrt(w / s);
  if (total_steps <= warmup) return 0.0;
  return std::max(0.0, (static_cast<double>(total_steps) - s) /
                           (static_cast<double>(total_steps) - w));
}

bool EarlyStopper::update(std::size_t epoch, double metric) {
  improved_ = !has_best_ || metric > best_;
  if (improved_) {
    has_best_ = true;
    best_ = metric;
    best_epoch_ = epoch;
    return false;
  }
  return epoch >= best_epoch_ + patience_;
}

AdamOptimizer::AdamOptimizer(std::size_t size, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(size, 0.0), v_(size, 0.0) {}

void AdamOptimizer::step(std::span<double> parameters, std::span<const double> gradient,
                         double lr) {
  if (parameters.size() != m_.size() || gradient.size() != m_.size()) {
    throw DomainError("optimizer state size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gradient[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gradient[i] * gradient[i];
    parameters[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + epsilon_);
  }
}

void TrainingConfig::validate() const {
  if (batch_size == 0 || warmup_steps == 0 || max_epochs == 0 || patience == 0 ||
      !(learning_rate > 0.0)) {
    throw DomainError("training config values must be positive");
  }
}

double batch_loss(const TranslatorModel& model, std::span<const TrainingExample> batch,
                  std::vector<double>* gradient) {
  if (batch.empty()) throw DomainError("loss over an empty batch");
  // The loss is a mean of per-example terms, so examples are processed one at
  // a time and only one activation cache is alive.
  const double n = static_cast<double>(batch.size());
  if (gradient != nullptr) gradient->assign(model.parameters().size(), 0.0);
  double total = 0.0;
  ForwardPass pass;
  std::vector<Matrix> dlogits;
  for (const auto& ex : batch) {
    const auto tf = teacher_forcing(model.vocabulary(), ex.smiles);
    const std::vector<Matrix> logits{model.forward(ex.spectrum, tf.input, pass.cache())};
    const std::vector<std::vector<int>> targets{tf.target};
    total += ce_loss(logits, targets, gradient != nullptr ? &dlogits : nullptr);
    if (gradient != nullptr) model.backward(pass.cache(), dlogits[0] / n, *gradient);
  }
  return total / n;
}

double next_token_accuracy(const TranslatorModel& model,
                           std::span<const TrainingExample> examples) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& ex : examples) {
    const auto tf = teacher_forcing(model.vocabulary(), ex.smiles);
    const Matrix logits = model.decode_logits(model.encode(ex.spectrum), tf.input);
    for (std::size_t t = 0; t < tf.target.size(); ++t) {
      if (tf.target[t] == TokenVocabulary::kPad) continue;
      Eigen::Index best = 0;
      logits.row(static_cast<Eigen::Index>(t)).maxCoeff(&best);
      correct += best == tf.target[t] ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

double validation_bleu(const TranslatorModel& model, std::span<const TrainingExample> valid) {
  if (valid.empty()) return 0.0;
  std::vector<std::vector<int>> hyps;
  std::vector<std::vector<int>> refs;
  for (const auto& ex : valid) {
    const ModelScorer scorer(model, ex.spectrum);
    hyps.push_back(greedy_decode(scorer).tokens);
    refs.push_back(model.vocabulary().encode(ex.smiles));
  }
  return bleu(hyps, refs);
}

}  // namespace

TrainingResult train(TranslatorModel& model, std::span<const TrainingExample> train_set,
                     std::span<const TrainingExample> valid_set, const TrainingConfig& config,
                     const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw DomainError("empty training set");
  std::set<std::string> train_ids;
  for (const auto& ex : train_set) train_ids.insert(ex.id);
  for (const auto& ex : valid_set) {
    if (train_ids.contains(ex.id)) {
      throw DomainError("example '" + ex.id + "' is in both training and validation sets");
    }
  }
  for (const auto* set : {&train_set, &valid_set}) {
    for (const auto& ex : *set) {
      if (model.vocabulary().encode(ex.smiles).size() + 1 > model.config().max_target_len) {
        throw DomainError("example '" + ex.id + "' is longer than max_target_len");
      }
    }
  }

  util::SeededRng rng(config.seed);
  AdamOptimizer adam(model.parameters().size());
  const std::size_t batches_per_epoch =
      (train_set.size() + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = batches_per_epoch * config.max_epochs;
  EarlyStopper stopper(config.patience);
  std::vector<double> best_parameters(model.parameters().begin(), model.parameters().end());

  TrainingResult result;
  std::vector<std::size_t> order(train_set.size());
  std::vector<double> gradient;
  std::vector<TrainingExample> batch;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    EpochRecord record;
    record.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      batch.clear();
      const std::size_t end = std::min(order.size(), (b + 1) * config.batch_size);
      for (std::size_t i = b * config.batch_size; i < end; ++i) batch.push_back(train_set[order[i]]);
      const double loss = batch_loss(model, batch, &gradient);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(adam.steps() + 1));
      }
      loss_sum += loss;
      const double lr = config.learning_rate *
                        lr_multiplier(adam.steps() + 1, config.warmup_steps, config.schedule,
                                      total_steps);
      adam.step(model.parameters(), gradient, lr);
      record.learning_rate = lr;
    }
    for (const double p : model.parameters()) {
      if (!std::isfinite(p)) {
        throw NumericError("non-finite parameter after epoch " + std::to_string(epoch) +
                           ", step " + std::to_string(adam.steps()));
      }
    }
    record.train_loss = loss_sum / static_cast<double>(batches_per_epoch);
    record.train_accuracy = next_token_accuracy(model, train_set);
    record.valid_bleu = validation_bleu(model, valid_set);
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);

    const bool stop = stopper.update(epoch, record.valid_bleu);
    if (stopper.improved()) best_parameters.assign(model.parameters().begin(), model.parameters().end());
    if (stop) {
      result.stopped_early = true;
      break;
    }
    if (config.stop_at_train_accuracy > 0.0 &&
        record.train_accuracy >= config.stop_at_train_accuracy) {
      break;
    }
  }
  result.steps = adam.steps();
  result.best_epoch = stopper.best_epoch();
  result.best_bleu = stopper.best();
  result.last_parameters.assign(model.parameters().begin(), model.parameters().end());
  model.set_parameters(std::move(best_parameters));
  return result;
}

}  // namespace ir_agent::translator
