#include <gtest/gtest.h>

#include <set>

#include "ir_agent/error.hpp"
#include "ir_agent/eval/harness.hpp"
#include "oracles.hpp"

using namespace ir_agent;
using namespace ir_agent::eval;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("id" + std::to_string(i));
  return out;
}

}  // namespace

TEST(Split, DeterministicDisjointAndComplete) {
  const auto all = ids(97);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SplitSpec spec{0.8, 0.1, 0.1, seed};
    const auto a = split(all, spec);
    auto shuffled = all;
    std::reverse(shuffled.begin(), shuffled.end());
    const auto b = split(shuffled, spec);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.valid, b.valid);
    EXPECT_EQ(a.test, b.test);
    EXPECT_EQ(a.train.size(), 77u);
    EXPECT_EQ(a.valid.size(), 9u);
    EXPECT_EQ(a.test.size(), 11u);
    std::set<std::string> seen;
    for (const auto* part : {&a.train, &a.valid, &a.test}) {
      for (const auto& id : *part) EXPECT_TRUE(seen.insert(id).second) << id;
    }
    EXPECT_EQ(seen.size(), all.size());
  }
  EXPECT_NE(split(all, {0.8, 0.1, 0.1, 1}).test, split(all, {0.8, 0.1, 0.1, 2}).test);
}

TEST(Split, ExactProductsAndPreconditions) {
  const auto s = split(ids(10), {0.8, 0.1, 0.1, 0});
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.valid.size(), 1u);
  EXPECT_THROW(split(ids(10), {0.8, 0.3, 0.1, 0}), DomainError);
  EXPECT_THROW(split(ids(5), {0.8, 0.1, 0.1, 0}), DomainError);
  auto dup = ids(12);
  dup[3] = dup[4];
  EXPECT_THROW(split(dup, {0.8, 0.1, 0.1, 0}), DomainError);
}

TEST(TopK, CountsEquivalentStructures) {
  const std::vector<RankedPrediction> preds = {
      {{"OCC", "CC"}, "CCO"},
      {{"CC", "C1=CC=CC=C1", "c1ccccc1"}, "c1ccccc1"},
      {{"((", "CN"}, "CN"},
      {{}, "CCC"},
  };
  const auto t1 = topk_accuracy(preds, 1);
  EXPECT_EQ(t1.hits, 1u);
  EXPECT_EQ(t1.examples, 4u);
  EXPECT_DOUBLE_EQ(t1.accuracy, 0.25);
  EXPECT_EQ(t1.parse_failures, 1u);
  const auto t2 = topk_accuracy(preds, 2);
  EXPECT_EQ(t2.hits, 2u);
  EXPECT_EQ(t2.aromatic_normalized_hits, 3u);
  const auto t3 = topk_accuracy(preds, 3);
  EXPECT_EQ(t3.hits, 3u);
  EXPECT_THROW(topk_accuracy(preds, 0), DomainError);
}

TEST(TopK, MonotoneInK) {
  util::SeededRng rng(8);
  const std::vector<std::string> pool = {"C", "CC", "CCO", "OCC", "CN", "c1ccccc1", "C1CC1", "(("};
  std::vector<RankedPrediction> preds;
  for (int i = 0; i < 200; ++i) {
    RankedPrediction p;
    p.truth = pool[rng.below(pool.size() - 1)];
    const auto n = rng.below(12);
    for (std::size_t j = 0; j < n; ++j) p.ranked.push_back(pool[rng.below(pool.size())]);
    preds.push_back(std::move(p));
  }
  double previous = 0.0;
  for (std::size_t k = 1; k <= 12; ++k) {
    const double a = topk_accuracy(preds, k).accuracy;
    EXPECT_GE(a, previous);
    previous = a;
  }
}

TEST(Experiment, ParsesConfigsAndSweeps) {
  const auto spec = load_experiment(oracle::data_path("experiment.json"));
  ASSERT_EQ(spec.configs.size(), 5u);
  EXPECT_EQ(spec.configs[0].name, "full");
  EXPECT_EQ(spec.configs[1].pipeline.mode, agents::AblationMode::kNoExperts);
  EXPECT_EQ(spec.configs[2].name, "num_candidates=1");
  EXPECT_EQ(spec.configs[4].pipeline.num_candidates, 5u);
  EXPECT_EQ(spec.configs[4].sweep_parameter, "num_candidates");
  EXPECT_EQ(spec.configs[0].pipeline.peak_distance, 5u);
  EXPECT_EQ(spec.runs, 3u);

  const auto beam = experiment_from_json({{"database", "d"}, {"table", "t"}, {"sweeps", {{"beam_width", {4}}}}}, {});
  EXPECT_EQ(beam.configs[0].pipeline.beam_width, 4u);
  EXPECT_EQ(beam.configs[0].pipeline.num_candidates, 4u);

  EXPECT_THROW(experiment_from_json({{"database", "d"}, {"table", "t"}, {"sweeps", {{"temperature", {0.1}}}}}, {}), SchemaError);
  EXPECT_THROW(experiment_from_json({{"database", "d"}, {"table", "t"}, {"unknown", 1}}, {}), SchemaError);
  EXPECT_THROW(experiment_from_json({{"database", "d"}, {"table", "t"}, {"configs", {{{"name", "a"}}, {{"name", "a"}}}}}, {}),
               SchemaError);
  EXPECT_THROW(experiment_from_json({{"database", "d"}, {"table", "t"}, {"configs", {{{"name", "a"}, {"overrides", {{"kk", 1}}}}}}}, {}),
               SchemaError);
}

TEST(Experiment, FingerprintsTrackContent) {
  const auto a = load_experiment(oracle::data_path("experiment.json"));
  auto b = a;
  EXPECT_EQ(experiment_fingerprint(a), experiment_fingerprint(b));
  EXPECT_EQ(config_fingerprint(a.configs[0], a).size(), 12u);
  b.configs[0].pipeline.top_n = 3;
  EXPECT_NE(config_fingerprint(a.configs[0], a), config_fingerprint(b.configs[0], b));
  EXPECT_EQ(config_fingerprint(a.configs[1], a), config_fingerprint(b.configs[1], b));
  EXPECT_NE(experiment_fingerprint(a), experiment_fingerprint(b));
}

TEST(Experiment, RunsOnToyData) {
  auto spec = load_experiment(oracle::data_path("experiment.json"));
  spec.configs.resize(2);
  std::vector<std::string> progress;
  const auto reports = run_experiment(spec, [&](const std::string& name, std::size_t run) {
    progress.push_back(name + "#" + std::to_string(run));
  });
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(progress.size(), 6u);
  for (const auto& r : reports) {
    ASSERT_EQ(r.runs.size(), 3u);
    for (const auto& run : r.runs) {
      EXPECT_EQ(run.examples, 18u);
      EXPECT_EQ(run.seed, run.run);
      for (std::size_t i = 1; i < run.topk.size(); ++i) {
        EXPECT_GE(run.topk[i].accuracy, run.topk[i - 1].accuracy);
      }
    }
    const auto s = r.summary(0);
    EXPECT_LE(s.min, s.mean);
    EXPECT_LE(s.mean, s.max);
  }
  EXPECT_EQ(reports[0].runs[0].backend_calls, 18u * 3u);
  EXPECT_EQ(reports[1].runs[0].backend_calls, 0u);

  spec.jobs = 4;
  const auto parallel = run_experiment(spec);
  EXPECT_EQ(render_csv(parallel), render_csv(reports));
}

TEST(Experiment, MissingArtifactsFailFirst) {
  auto spec = load_experiment(oracle::data_path("experiment.json"));
  spec.table = "missing.csv";
  EXPECT_THROW(run_experiment(spec), IoError);
}
