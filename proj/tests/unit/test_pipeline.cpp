#include <gtest/gtest.h>

#include "ir_agent/agents/pipeline.hpp"
#include "ir_agent/error.hpp"
#include "ir_agent/spectrum_io.hpp"
#include "oracles.hpp"

using namespace ir_agent;
namespace ag = ir_agent::agents;

namespace {

struct Toy {
  std::vector<Spectrum> spectra;
  std::shared_ptr<const SpectraDatabase> db;
  std::vector<AbsorptionBand> table;
  std::unique_ptr<translator::RetrievalGenerator> generator;

  Toy() {
    for (const auto& s : load_spectra(oracle::data_path("toy_spectra.jsonl"))) {
      spectra.push_back(s.mode() == IntensityMode::kAbsorbance ? s : to_absorbance(s));
    }
    db = std::make_shared<const SpectraDatabase>(spectra);
    table = load_table(oracle::data_path("table.csv"));
    generator = std::make_unique<translator::RetrievalGenerator>(db, true);
  }

  ag::PipelineResources resources(ag::LlmBackend* backend) const {
    return {generator.get(), db.get(), table, backend};
  }
};

const Toy& toy() {
  static const Toy t;
  return t;
}

ag::PipelineConfig config(ag::AblationMode mode) {
  ag::PipelineConfig c;
  c.mode = mode;
  c.peak_distance = 5;
  c.exclude_self = true;
  return c;
}

ag::ScriptedMockBackend mock() {
  return ag::ScriptedMockBackend::load(oracle::data_path("mock_script.json"));
}

}  // namespace

TEST(Pipeline, CallCountsPerMode) {
  const std::vector<std::pair<ag::AblationMode, std::size_t>> expected = {
      {ag::AblationMode::kFull, 3},    {ag::AblationMode::kTiOnly, 2},
      {ag::AblationMode::kRetOnly, 2}, {ag::AblationMode::kSingleAgent, 1},
      {ag::AblationMode::kNoExperts, 0}};
  for (const auto& [mode, calls] : expected) {
    EXPECT_EQ(ag::expected_calls(mode), calls);
    auto backend = mock();
    for (std::size_t i = 0; i < 5; ++i) {
      const auto r = ag::elucidate(config(mode), toy().resources(&backend), toy().spectra[i]);
      EXPECT_EQ(r.calls.size(), calls) << ag::mode_name(mode);
      EXPECT_EQ(r.ranked.empty(), false);
    }
    EXPECT_EQ(backend.call_count(), 5 * calls) << ag::mode_name(mode);
  }
}

TEST(Pipeline, DeterministicJson) {
  const auto& s = toy().spectra[3];
  auto a = mock();
  auto b = mock();
  const auto ra = ag::elucidate(config(ag::AblationMode::kFull), toy().resources(&a), s);
  auto sequential = config(ag::AblationMode::kFull);
  sequential.parallel_experts = false;
  const auto rb = ag::elucidate(sequential, toy().resources(&b), s);
  EXPECT_EQ(ag::result_to_json(ra).dump(), ag::result_to_json(rb).dump());
  EXPECT_EQ(ra.ranked.front(), "CCO");
  EXPECT_EQ(ra.dropped_unparseable, 1u);
  EXPECT_EQ(ra.dropped_duplicates, 1u);
}

TEST(Pipeline, FailedExpertIsDroppedAndSeStillRuns) {
  auto backend = mock();
  backend.set_agent_default("ret", {"", std::nullopt, std::string("ret down")});
  const auto r = ag::elucidate(config(ag::AblationMode::kFull), toy().resources(&backend),
                               toy().spectra[0]);
  EXPECT_FALSE(r.ret.has_value());
  EXPECT_TRUE(r.ti.has_value());
  ASSERT_EQ(r.calls.size(), 3u);
  EXPECT_TRUE(r.calls[0].failed);
  EXPECT_FALSE(r.fallback);
  EXPECT_NE(r.calls.back().prompt.user.find("Not available."), std::string::npos);
}

TEST(Pipeline, SeFailureFallsBackToCandidates) {
  auto backend = mock();
  backend.set_agent_default("se", {"", std::nullopt, std::string("se down")});
  auto c = config(ag::AblationMode::kFull);
  c.k = 3;
  const auto r = ag::elucidate(c, toy().resources(&backend), toy().spectra[0]);
  EXPECT_TRUE(r.fallback);
  ASSERT_EQ(r.ranked.size(), 3u);
  EXPECT_EQ(r.ranked.front(), r.candidates.front());
}

TEST(Pipeline, ChemicalInfoNeedsStructure) {
  auto backend = mock();
  auto c = config(ag::AblationMode::kFull);
  c.chemical_info = ag::ChemicalInfoKind::kCarbonCount;
  const Spectrum anonymous(toy().spectra[0].grid(),
                           std::vector<double>(toy().spectra[0].values().begin(),
                                               toy().spectra[0].values().end()),
                           IntensityMode::kAbsorbance, "anon");
  EXPECT_THROW(ag::elucidate(c, toy().resources(&backend), anonymous), DomainError);
  const auto r = ag::elucidate(c, toy().resources(&backend), toy().spectra[0]);
  for (const auto& call : r.calls) {
    EXPECT_NE(call.prompt.user.find("carbon atoms."), std::string::npos);
  }
}

TEST(Pipeline, Preconditions) {
  auto backend = mock();
  const auto transmittance = load_spectra(oracle::data_path("toy_spectra.jsonl"))[4];
  ASSERT_EQ(transmittance.mode(), IntensityMode::kTransmittance);
  EXPECT_THROW(ag::elucidate(config(ag::AblationMode::kFull), toy().resources(&backend),
                             transmittance),
               DomainError);
  auto res = toy().resources(nullptr);
  EXPECT_THROW(ag::elucidate(config(ag::AblationMode::kFull), res, toy().spectra[0]), DomainError);
  EXPECT_NO_THROW(ag::elucidate(config(ag::AblationMode::kNoExperts), res, toy().spectra[0]));
}

TEST(PipelineConfig, JsonRoundTripAndValidation) {
  auto c = config(ag::AblationMode::kRetOnly);
  c.chemical_info = ag::ChemicalInfoKind::kScaffold;
  c.top_n = 7;
  const auto back = ag::pipeline_config_from_json(ag::pipeline_config_to_json(c));
  EXPECT_EQ(ag::pipeline_config_to_json(back), ag::pipeline_config_to_json(c));
  EXPECT_THROW(ag::pipeline_config_from_json({{"k", 3}, {"typo", 1}}), SchemaError);
  EXPECT_THROW(ag::pipeline_config_from_json({{"mode", "half"}}), SchemaError);
  EXPECT_THROW(ag::pipeline_config_from_json({{"k", "three"}}), SchemaError);
  EXPECT_THROW(ag::pipeline_config_from_json({{"k", 0}}), DomainError);
  EXPECT_EQ(ag::pipeline_config_from_json(nlohmann::json::object()).k, 10u);
  for (const auto m : {ag::AblationMode::kFull, ag::AblationMode::kTiOnly, ag::AblationMode::kRetOnly,
                       ag::AblationMode::kSingleAgent, ag::AblationMode::kNoExperts}) {
    EXPECT_EQ(ag::parse_mode(ag::mode_name(m)), m);
  }
}
