#include "ir_agent/translator/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "ir_agent/error.hpp"

namespace ir_agent::translator {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int argmax(std::span<const double> values) {
  int best = -1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    if (best < 0 || values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

/// Finite tokens by log-probability descending, ties to the lower id.
std::vector<int> ranked_tokens(std::span<const double> log_probs) {
  std::vector<int> order;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    if (std::isfinite(log_probs[i])) order.push_back(static_cast<int>(i));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return log_probs[static_cast<std::size_t>(a)] > log_probs[static_cast<std::size_t>(b)];
  });
  return order;
}

double prefix_score(const StepScorer& scorer, std::span<const int> tokens) {
  double score = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    score += scorer.next_log_probs(tokens.first(t))[static_cast<std::size_t>(tokens[t])];
  }
  return score;
}

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

}  // namespace

std::vector<double> log_softmax(std::span<const double> logits) {
  double max = kNegInf;
  for (const double v : logits) max = std::max(max, v);
  double sum = 0.0;
  for (const double v : logits) {
    if (v != kNegInf) sum += std::exp(v - max);
  }
  const double log_z = max + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = logits[i] == kNegInf ? kNegInf : logits[i] - log_z;
  }
  return out;
}

ModelScorer::ModelScorer(const TranslatorModel& model, std::span<const double> spectrum)
    : model_(model), memory_(model.encode(spectrum)) {}

std::vector<double> ModelScorer::next_log_probs(std::span<const int> prefix) const {
  std::vector<int> input;
  input.reserve(prefix.size() + 1);
  input.push_back(TokenVocabulary::kBos);
  input.insert(input.end(), prefix.begin(), prefix.end());
  const Matrix logits = model_.decode_logits(memory_, input);
  std::vector<double> last(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    last[static_cast<std::size_t>(c)] = logits(logits.rows() - 1, c);
  }
  for (const int reserved : {TokenVocabulary::kBos, TokenVocabulary::kPad, TokenVocabulary::kUnk}) {
    last[static_cast<std::size_t>(reserved)] = kNegInf;
  }
  return log_softmax(last);
}

Hypothesis greedy_decode(const StepScorer& scorer, std::span<const int> forced_prefix) {
  Hypothesis h;
  h.tokens.assign(forced_prefix.begin(), forced_prefix.end());
  h.score = prefix_score(scorer, h.tokens);
  const auto eos = scorer.eos();
  while (h.tokens.size() < scorer.max_length()) {
    const auto log_probs = scorer.next_log_probs(h.tokens);
    const int next = argmax(log_probs);
    if (next < 0) throw DomainError("scorer allows no token");
    h.score += log_probs[static_cast<std::size_t>(next)];
    if (eos && next == *eos) {
      h.ended_with_eos = true;
      break;
    }
    h.tokens.push_back(next);
  }
  return h;
}

std::vector<Hypothesis> beam_decode(const StepScorer& scorer, std::size_t width) {
  if (width < 1) throw DomainError("beam width must be at least 1");
  const auto eos = scorer.eos();

  std::vector<Hypothesis> live(1);
  std::vector<Hypothesis> completed;
  for (std::size_t step = 0;
       step < scorer.max_length() && !live.empty() && completed.size() < width; ++step) {
    // (score, parent, token): best score first, then earlier parent, then lower token.
    std::vector<std::tuple<double, std::size_t, int>> expansions;
    for (std::size_t parent = 0; parent < live.size(); ++parent) {
      const auto log_probs = scorer.next_log_probs(live[parent].tokens);
      for (std::size_t v = 0; v < log_probs.size(); ++v) {
        if (!std::isfinite(log_probs[v])) continue;
        expansions.emplace_back(live[parent].score + log_probs[v], parent, static_cast<int>(v));
      }
    }
    const std::size_t keep = std::min(width, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep),
                      expansions.end(), [](const auto& a, const auto& b) {
                        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
                        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
                        return std::get<2>(a) < std::get<2>(b);
                      });
    std::vector<Hypothesis> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const auto& [score, parent, token] = expansions[i];
      Hypothesis h{live[parent].tokens, score, false, HypothesisOrigin::kBeam};
      if (eos && token == *eos) {
        h.ended_with_eos = true;
        completed.push_back(std::move(h));
      } else {
        h.tokens.push_back(token);
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }
  // Without an end token, reaching the length bound is how sequences finish.
  if (!eos) {
    for (auto& h : live) completed.push_back(std::move(h));
  }
  std::sort(completed.begin(), completed.end(), better);
  if (completed.size() > width) completed.resize(width);

  std::set<std::vector<int>> emitted;
  for (const auto& h : completed) emitted.insert(h.tokens);
  while (completed.size() < width) {
    Hypothesis candidate = greedy_decode(scorer);
    bool found = !emitted.contains(candidate.tokens);
    if (!found) {
      // Force the next-best token at the earliest position that yields
      // something new, continuing greedily from there.
      const Hypothesis base = candidate;
      const std::size_t positions = std::min(base.tokens.size() + 1, scorer.max_length());
      for (std::size_t t = 0; t < positions && !found; ++t) {
        const std::span<const int> prefix(base.tokens.data(), t);
        const auto log_probs = scorer.next_log_probs(prefix);
        const int greedy_choice = t < base.tokens.size() ? base.tokens[t] : (eos ? *eos : -1);
        for (const int alt : ranked_tokens(log_probs)) {
          if (alt == greedy_choice) continue;
          if (eos && alt == *eos) {
            candidate = Hypothesis{std::vector<int>(prefix.begin(), prefix.end()),
                                   prefix_score(scorer, prefix) + log_probs[static_cast<std::size_t>(alt)],
                                   true, HypothesisOrigin::kGreedySupplement};
          } else {
            std::vector<int> forced(prefix.begin(), prefix.end());
            forced.push_back(alt);
            candidate = greedy_decode(scorer, forced);
          }
          if (!emitted.contains(candidate.tokens)) {
            found = true;
            break;
          }
        }
      }
    }
    if (!found) {
      throw DomainError("cannot produce " + std::to_string(width) + " distinct sequences");
    }
    candidate.origin = HypothesisOrigin::kGreedySupplement;
    emitted.insert(candidate.tokens);
    completed.push_back(std::move(candidate));
  }
  return completed;
}

}  // namespace ir_agent::translator
