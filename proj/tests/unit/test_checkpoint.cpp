#include <gtest/gtest.h>

#include <filesystem>

#include "ir_agent/error.hpp"
#include "ir_agent/translator/checkpoint.hpp"
#include "micro.hpp"

using namespace ir_agent;
using namespace ir_agent::translator;

TEST(Checkpoint, RoundTripIsExact) {
  const TranslatorModel m(micro::config(16, 12), micro::vocabulary());
  const auto path = std::filesystem::temp_directory_path() / "ir_agent_ckpt_test.json";
  save_checkpoint(m, path, {{"note", "unit"}});
  const auto back = load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.vocabulary().tokens(), m.vocabulary().tokens());
  EXPECT_EQ(back.config().d_model, 8u);
  EXPECT_EQ(back.config().spectrum_length, 16u);
  ASSERT_EQ(back.parameters().size(), m.parameters().size());
  EXPECT_TRUE(std::equal(m.parameters().begin(), m.parameters().end(), back.parameters().begin()));
}

TEST(Checkpoint, RejectsWrongFormatVersionAndShapes) {
  const TranslatorModel m(micro::config(), micro::vocabulary());
  auto j = checkpoint_to_json(m);
  EXPECT_EQ(j["format"], "ir-agent-translator");
  EXPECT_EQ(j["version"], 1);

  auto bad = j;
  bad["version"] = 99;
  EXPECT_THROW(checkpoint_from_json(bad), SchemaError);
  bad = j;
  bad["format"] = "other";
  EXPECT_THROW(checkpoint_from_json(bad), SchemaError);
  bad = j;
  bad["parameters"]["output.bias"].erase(0);
  EXPECT_THROW(checkpoint_from_json(bad), SchemaError);
  bad = j;
  bad["parameters"].erase("output.bias");
  EXPECT_THROW(checkpoint_from_json(bad), SchemaError);
  bad = j;
  bad["config"]["mystery"] = 1;
  EXPECT_THROW(checkpoint_from_json(bad), SchemaError);
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.json"), IoError);
}

TEST(Checkpoint, ConfigJson) {
  TrainingConfig t;
  t.schedule = DecaySchedule::kLinear;
  t.learning_rate = 0.0005;
  const auto back = training_config_from_json(training_config_to_json(t));
  EXPECT_EQ(back.schedule, DecaySchedule::kLinear);
  EXPECT_EQ(back.learning_rate, 0.0005);
  EXPECT_EQ(config_from_json(nlohmann::json::object()).d_model, 128u);
  EXPECT_THROW(training_config_from_json({{"epochs", 3}}), SchemaError);
}
