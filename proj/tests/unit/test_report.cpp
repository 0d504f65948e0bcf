#include <gtest/gtest.h>

#include <filesystem>

#include "ir_agent/error.hpp"
#include "ir_agent/eval/harness.hpp"
#include "ir_agent/util/text.hpp"

using namespace ir_agent;
using namespace ir_agent::eval;

namespace {

RunReport report(std::string name, std::string parameter, std::string value, std::uint64_t salt) {
  RunReport r;
  r.name = std::move(name);
  r.fingerprint = util::sha256_hex(r.name).substr(0, 12);
  r.sweep_parameter = std::move(parameter);
  r.sweep_value = std::move(value);
  r.ks = {1, 3};
  util::SeededRng rng(salt);
  for (std::size_t run = 0; run < 3; ++run) {
    RunResult rr;
    rr.run = run;
    rr.seed = run;
    rr.examples = 7;
    std::size_t hits = rng.below(4);
    for (const auto k : r.ks) {
      TopKStats t;
      t.k = k;
      t.examples = 7;
      t.hits = hits;
      t.accuracy = static_cast<double>(hits) / 7.0;
      t.parse_failures = rng.below(3);
      t.aromatic_normalized_hits = hits;
      rr.topk.push_back(t);
      hits += rng.below(3);
    }
    rr.cost.add("ti", {100 + run, 10, 7, false});
    rr.cost.add("se", {300, 20 + run, 7, run == 2});
    rr.backend_calls = 14;
    rr.fallbacks = run;
    r.runs.push_back(std::move(rr));
  }
  return r;
}

std::vector<RunReport> sample() {
  return {report("full", "", "", 1), report("a \"quoted\", name", "", "", 2),
          report("num_candidates=1", "num_candidates", "1", 3),
          report("num_candidates=5", "num_candidates", "5", 4)};
}

}  // namespace

TEST(Report, SummaryUsesSampleStd) {
  RunReport r;
  r.ks = {1};
  for (const double a : {0.2, 0.4, 0.6}) {
    RunResult rr;
    TopKStats t;
    t.accuracy = a;
    rr.topk.push_back(t);
    r.runs.push_back(rr);
  }
  const auto s = r.summary(0);
  EXPECT_NEAR(s.mean, 0.4, 1e-15);
  EXPECT_NEAR(s.stddev, 0.2, 1e-15);
  EXPECT_EQ(s.min, 0.2);
  EXPECT_EQ(s.max, 0.6);
}

TEST(Report, CsvRoundTripRegeneratesMarkdown) {
  const auto reports = sample();
  const auto csv = render_csv(reports);
  const auto back = reports_from_csv(csv);
  ASSERT_EQ(back.size(), reports.size());
  EXPECT_EQ(render_csv(back), csv);
  EXPECT_EQ(render_markdown(back), render_markdown(reports));
  EXPECT_EQ(render_sweep_svgs(back), render_sweep_svgs(reports));
  EXPECT_EQ(back[1].name, reports[1].name);
  EXPECT_EQ(back[0].runs[2].topk[1].accuracy, reports[0].runs[2].topk[1].accuracy);
  EXPECT_EQ(back[0].total_cost().total(), reports[0].total_cost().total());
}

TEST(Report, MarkdownContents) {
  const auto md = render_markdown(sample());
  EXPECT_TRUE(md.starts_with("# Evaluation report"));
  EXPECT_NE(md.find("## full"), std::string::npos);
  EXPECT_NE(md.find("Mean"), std::string::npos);
  EXPECT_NE(md.find("(estimated)"), std::string::npos);
}

TEST(Report, SweepSvgsAreDeterministic) {
  const auto svgs = render_sweep_svgs(sample());
  ASSERT_EQ(svgs.size(), 1u);
  ASSERT_TRUE(svgs.contains("num_candidates"));
  EXPECT_TRUE(svgs.at("num_candidates").starts_with("<svg"));
  EXPECT_EQ(svgs, render_sweep_svgs(sample()));
}

TEST(Report, CsvSchemaErrors) {
  EXPECT_THROW(reports_from_csv("config,fingerprint\nx,y\n"), SchemaError);
  auto csv = render_csv(sample());
  const auto second_line = csv.find('\n') + 1;
  csv.replace(csv.find(",7,", second_line), 3, ",seven,");
  try {
    reports_from_csv(csv);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Report, EmitWritesFilesAndRejectsEmpty) {
  const auto dir = std::filesystem::temp_directory_path() / "ir_agent_report_test";
  std::filesystem::remove_all(dir);
  EXPECT_THROW(emit_report({}, dir), DomainError);
  EXPECT_FALSE(std::filesystem::exists(dir));
  const auto reports = sample();
  emit_report(reports, dir);
  EXPECT_EQ(util::read_file(dir / "report.md"), render_markdown(reports));
  EXPECT_EQ(util::read_file(dir / "raw.csv"), render_csv(reports));
  EXPECT_TRUE(std::filesystem::exists(dir / "sweep_num_candidates.svg"));
  std::filesystem::remove_all(dir);
}
