#include "ir_agent/translator/checkpoint.hpp"

#include <set>

#include "ir_agent/error.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent::translator {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, std::string_view what) {
  if (!j.is_object()) throw SchemaError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw SchemaError("unknown " + std::string(what) + " key '" + key + "'");
    }
  }
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

json config_to_json(const TranslatorConfig& c) {
  return {{"d_model", c.d_model},
          {"encoder_layers", c.encoder_layers},
          {"decoder_layers", c.decoder_layers},
          {"heads", c.heads},
          {"ffn_dim", c.ffn_width()},
          {"max_target_len", c.max_target_len},
          {"spectrum_length", c.spectrum_length},
          {"beam_width", c.beam_width},
          {"seed", c.seed}};
}

TranslatorConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"d_model", "encoder_layers", "decoder_layers", "heads", "ffn_dim",
                  "max_target_len", "spectrum_length", "beam_width", "seed"},
                 "translator config");
  TranslatorConfig c;
  read_key(j, "d_model", c.d_model);
  read_key(j, "encoder_layers", c.encoder_layers);
  read_key(j, "decoder_layers", c.decoder_layers);
  read_key(j, "heads", c.heads);
  read_key(j, "ffn_dim", c.ffn_dim);
  read_key(j, "max_target_len", c.max_target_len);
  read_key(j, "spectrum_length", c.spectrum_length);
  read_key(j, "beam_width", c.beam_width);
  read_key(j, "seed", c.seed);
  c.validate();
  return c;
}

json training_config_to_json(const TrainingConfig& c) {
  return {{"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"warmup_steps", c.warmup_steps},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"schedule", std::string(schedule_name(c.schedule))},
          {"seed", c.seed},
          {"stop_at_train_accuracy", c.stop_at_train_accuracy}};
}

TrainingConfig training_config_from_json(const json& j) {
  reject_unknown(j,
                 {"batch_size", "learning_rate", "warmup_steps", "max_epochs", "patience",
                  "schedule", "seed", "stop_at_train_accuracy"},
                 "training config");
  TrainingConfig c;
  read_key(j, "batch_size", c.batch_size);
  read_key(j, "learning_rate", c.learning_rate);
  read_key(j, "warmup_steps", c.warmup_steps);
  read_key(j, "max_epochs", c.max_epochs);
  read_key(j, "patience", c.patience);
  std::string schedule(schedule_name(c.schedule));
  read_key(j, "schedule", schedule);
  c.schedule = parse_schedule(schedule);
  read_key(j, "seed", c.seed);
  read_key(j, "stop_at_train_accuracy", c.stop_at_train_accuracy);
  c.validate();
  return c;
}

json checkpoint_to_json(const TranslatorModel& model, const json& metadata) {
  json params = json::object();
  const auto p = model.parameters();
  for (const auto& slot : model.layout().all) {
    params[slot.name] = std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(slot.offset),
                                            p.begin() + static_cast<std::ptrdiff_t>(slot.offset + slot.size()));
  }
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"config", config_to_json(model.config())},
          {"vocabulary", model.vocabulary().tokens()},
          {"metadata", metadata},
          {"parameters", std::move(params)}};
}

TranslatorModel checkpoint_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
    throw SchemaError("not a translator checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw SchemaError("unsupported checkpoint version " + j.value("version", json()).dump());
  }
  for (const char* key : {"config", "vocabulary", "parameters"}) {
    if (!j.contains(key)) throw SchemaError(std::string("checkpoint lacks '") + key + "'");
  }
  std::vector<std::string> tokens;
  try {
    tokens = j.at("vocabulary").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad vocabulary: ") + e.what());
  }
  TranslatorModel model(config_from_json(j.at("config")), TokenVocabulary(std::move(tokens)));
  const json& params = j.at("parameters");
  std::vector<double> flat(model.layout().parameter_count);
  for (const auto& slot : model.layout().all) {
    if (!params.contains(slot.name)) throw SchemaError("checkpoint lacks tensor '" + slot.name + "'");
    const auto& values = params.at(slot.name);
    if (!values.is_array() || values.size() != slot.size()) {
      throw SchemaError("tensor '" + slot.name + "' has the wrong size");
    }
    for (std::size_t i = 0; i < slot.size(); ++i) {
      if (!values[i].is_number()) throw SchemaError("tensor '" + slot.name + "' has a non-number");
      flat[slot.offset + i] = values[i].get<double>();
    }
  }
  if (params.size() != model.layout().all.size()) {
    throw SchemaError("checkpoint has tensors the configuration does not define");
  }
  model.set_parameters(std::move(flat));
  return model;
}

void save_checkpoint(const TranslatorModel& model, const std::filesystem::path& path,
                     const json& metadata) {
  util::write_file(path, checkpoint_to_json(model, metadata).dump() + "\n");
}

TranslatorModel load_checkpoint(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(util::read_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace ir_agent::translator
