#include <gtest/gtest.h>

#include <set>

#include <cmath>

#include "ir_agent/error.hpp"
#include "ir_agent/translator/decoding.hpp"
#include "micro.hpp"
#include "oracles.hpp"

using namespace ir_agent;
using namespace ir_agent::translator;

namespace {

std::vector<std::vector<int>> tokens_of(const std::vector<Hypothesis>& hs) {
  std::vector<std::vector<int>> out;
  for (const auto& h : hs) out.push_back(h.tokens);
  return out;
}

}  // namespace

TEST(LogSoftmax, NormalizesAndKeepsMasks) {
  const auto lp = log_softmax(std::vector<double>{1.0, 2.0, -INFINITY, 3.0});
  double total = 0.0;
  for (const double v : lp) total += std::exp(v);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(lp[2], -INFINITY);
  EXPECT_NEAR(lp[3] - lp[1], 1.0, 1e-12);
}

TEST(Beam, PositionLogitsMatchEnumeration) {
  // Logits depend only on the position, so the top-3 beam is exact.
  const std::vector<std::vector<double>> table = {{0.3, 1.2, -0.4}, {2.0, 1.9, 0.1}, {-1.0, 0.5, 0.45}};
  const oracle::TableScorer scorer(3, std::nullopt, 3, [&](std::span<const int> prefix) {
    return table[prefix.size()];
  });
  const auto all = oracle::enumerate(scorer);
  ASSERT_EQ(all.size(), 27u);
  const auto beam = beam_decode(scorer, 3);
  ASSERT_EQ(beam.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(beam[i].tokens, all[i].tokens);
    EXPECT_NEAR(beam[i].score, all[i].score, 1e-12);
    EXPECT_EQ(beam[i].origin, HypothesisOrigin::kBeam);
  }
}

TEST(Beam, ExhaustiveWidthIsExactWithEos) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // The last position only allows EOS, so every sequence ends properly and
    // no expansion is ever pruned at width 13.
    const auto logits = oracle::random_logits(seed, 4);
    const oracle::TableScorer scorer(4, 0, 3, [logits](std::span<const int> prefix) {
      auto v = logits(prefix);
      if (prefix.size() == 2) std::fill(v.begin() + 1, v.end(), -INFINITY);
      return v;
    });
    const auto all = oracle::enumerate(scorer);
    ASSERT_EQ(all.size(), 13u);  // 1 + 3 + 9
    const auto beam = beam_decode(scorer, all.size());
    ASSERT_EQ(beam.size(), all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
      EXPECT_EQ(beam[i].tokens, all[i].tokens) << seed << " " << i;
      EXPECT_NEAR(beam[i].score, all[i].score, 1e-12);
      EXPECT_TRUE(beam[i].ended_with_eos);
      EXPECT_EQ(beam[i].origin, HypothesisOrigin::kBeam);
    }
    EXPECT_THROW(beam_decode(scorer, 14), DomainError);
  }
}

TEST(Beam, WidthOneIsGreedy) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const oracle::TableScorer scorer(5, 1, 6, oracle::random_logits(seed, 5));
    const auto beam = beam_decode(scorer, 1);
    const auto greedy = greedy_decode(scorer);
    ASSERT_EQ(beam.size(), 1u);
    EXPECT_EQ(beam[0].tokens, greedy.tokens);
    EXPECT_NEAR(beam[0].score, greedy.score, 1e-12);
  }
}

TEST(Beam, GreedySupplementFillsShortBeams) {
  // EOS = 0 dominates; with max length 1 only the empty sequence ends properly.
  const oracle::TableScorer scorer(3, 0, 1, [](std::span<const int>) {
    return std::vector<double>{3.0, 1.0, 0.5};
  });
  const auto out = beam_decode(scorer, 3);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(tokens_of(out), (std::vector<std::vector<int>>{{}, {1}, {2}}));
  EXPECT_EQ(out[0].origin, HypothesisOrigin::kBeam);
  EXPECT_EQ(out[1].origin, HypothesisOrigin::kGreedySupplement);
  EXPECT_FALSE(out[1].ended_with_eos);

  const oracle::TableScorer tiny(2, 0, 1, [](std::span<const int>) {
    return std::vector<double>{3.0, 1.0};
  });
  EXPECT_THROW(beam_decode(tiny, 3), DomainError);
  EXPECT_THROW(beam_decode(scorer, 0), DomainError);
}

TEST(Beam, ResultsAreDistinctAndSorted) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const oracle::TableScorer scorer(6, 1, 5, oracle::random_logits(seed + 100, 6));
    const auto out = beam_decode(scorer, 5);
    ASSERT_EQ(out.size(), 5u);
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_TRUE(seen.insert(out[i].tokens).second);
      if (i > 0 && out[i].origin == HypothesisOrigin::kBeam) EXPECT_LE(out[i].score, out[i - 1].score);
    }
  }
}

TEST(ModelScorerTest, NeverEmitsReservedTokens) {
  const TranslatorModel m(micro::config(), micro::vocabulary());
  util::SeededRng rng(3);
  const auto spectrum = micro::random_spectrum(rng, 16);
  const ModelScorer scorer(m, spectrum);
  const auto lp = scorer.next_log_probs(std::vector<int>{});
  EXPECT_EQ(lp[TokenVocabulary::kBos], -INFINITY);
  EXPECT_EQ(lp[TokenVocabulary::kPad], -INFINITY);
  EXPECT_EQ(lp[TokenVocabulary::kUnk], -INFINITY);
  EXPECT_TRUE(std::isfinite(lp[TokenVocabulary::kEos]));
  const auto out = beam_decode(scorer, 4);
  ASSERT_EQ(out.size(), 4u);
  for (const auto& h : out) {
    EXPECT_LE(h.tokens.size(), m.config().max_target_len);
    for (const int t : h.tokens) EXPECT_FALSE(TokenVocabulary::is_reserved(t));
  }
}
